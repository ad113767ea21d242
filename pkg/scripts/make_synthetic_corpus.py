"""Write a seeded synthetic issue export in the canonical CSV layout.

    python scripts/make_synthetic_corpus.py --rows 5324 --seed 0 --output issues.csv
"""
import argparse

from triage.corpus import write_csv
from triage.synthetic import synthetic_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=5324)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise", type=float, default=0.5, help="share of role-agnostic tokens and habits")
    ap.add_argument("--output", default="issues.csv")
    args = ap.parse_args()
    records = synthetic_corpus(args.rows, args.seed, args.noise)
    write_csv(records, args.output)
    print(f"wrote {len(records)} issues to {args.output}")


if __name__ == "__main__":
    main()
