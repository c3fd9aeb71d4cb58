#!/usr/bin/env python3
"""
Make Synthetic Corpus Tool
Writes a labeled corpus with disjoint per-category vocabularies, for smoke
tests and for exercising the evaluate/topics/timefix commands without a
real tracker export.

Usage:
    python3 tools/make_synthetic_corpus.py --out synthetic.jsonl
    python3 tools/make_synthetic_corpus.py --out small.csv --per-class 20 --seed 3
    python3 tools/make_synthetic_corpus.py --out rare.jsonl --rare database-issue --share 0.03
"""

import argparse
import logging
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from rootcause.core.corpus import CorpusError, RootCause, frequency, guess_format, save_corpus
from rootcause.core.synthetic import downsample, separable_corpus

logger = logging.getLogger(__name__)


def main():
    parser = argparse.ArgumentParser(description='Generate a synthetic root-cause corpus')
    parser.add_argument('--out', required=True, help='Output corpus (.jsonl or .csv)')
    parser.add_argument('--per-class', type=int, default=120, help='Reports per category (default: 120)')
    parser.add_argument('--noise-tokens', type=int, default=4, help='Shared noise words per report (default: 4)')
    parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    parser.add_argument('--rare', help='Category value to shrink, e.g. database-issue')
    parser.add_argument('--share', type=float, default=0.03, help='Target share of the rare category')
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        corpus = separable_corpus(per_class=args.per_class, noise_tokens=args.noise_tokens, seed=args.seed)
        if args.rare:
            corpus = downsample(corpus, RootCause.parse(args.rare), args.share, seed=args.seed)
        save_corpus(corpus, args.out, guess_format(args.out))
    except (CorpusError, ValueError) as e:
        logger.error(f"❌ {e}")
        return 1

    logger.info(f"✅ Wrote {len(corpus)} reports to {args.out}")
    for cause, share in frequency(corpus).items():
        logger.info(f"   {cause.value:<28}{share.count:>6}{share.share * 100:>7.1f}%")
    return 0


if __name__ == '__main__':
    sys.exit(main())
