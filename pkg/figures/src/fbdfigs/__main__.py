"""Entry point: python -m fbdfigs <spec.json> [...]"""

import sys

from .render import FigureSpec, render


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: python -m fbdfigs <spec.json> [<spec.json> ...]")
        return 0 if argv else 2
    for path in argv:
        spec = FigureSpec.from_json(path)
        written = render(spec)
        for w in written:
            print(f"wrote {w}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
