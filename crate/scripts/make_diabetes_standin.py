#!/usr/bin/env python3
"""Generate data/diabetes.csv, a synthetic stand-in with the shape of the
Pima Indians diabetes data (8 numeric attributes, 768 rows, 500 negative and
268 positive). The original file cannot be redistributed from this sandbox,
so the generator mimics its marginal ranges and the rough informativeness of
each attribute (glucose strongest, then BMI and age, the rest weak or noise).

Deterministic: fixed seed, stdlib only.
"""
import csv
import random
from pathlib import Path

SEED = 20130402
N_NEG, N_POS = 500, 268


def clamp(v, lo, hi):
    return max(lo, min(hi, v))


def row(rng, positive):
    s = 1.0 if positive else 0.0
    age = clamp(rng.gauss(31 + 6 * s, 10), 21, 81)
    preg = clamp(round(rng.gauss(3.3 + 1.5 * s + (age - 30) / 8, 3)), 0, 17)
    glucose = clamp(rng.gauss(110 + 31 * s, 24), 44, 199)
    bp = clamp(rng.gauss(68 + 3 * s, 12), 24, 122)
    bmi = clamp(rng.gauss(30.3 + 4.8 * s, 6.5), 18.2, 67.1)
    skin = clamp(rng.gauss(bmi * 0.7 + 2 * s, 7), 7, 99)
    insulin = clamp(rng.gauss(glucose * 1.1 + 20 * s - 10, 60), 14, 846)
    pedigree = clamp(rng.lognormvariate(-0.95 + 0.25 * s, 0.6), 0.078, 2.42)
    return [
        int(preg),
        round(glucose),
        round(bp),
        round(skin),
        round(insulin),
        round(bmi, 1),
        round(pedigree, 3),
        round(age),
        "tested_positive" if positive else "tested_negative",
    ]


def main():
    rng = random.Random(SEED)
    labels = [False] * N_NEG + [True] * N_POS
    rng.shuffle(labels)
    out = Path(__file__).resolve().parent.parent / "data" / "diabetes.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age", "class"])
        for positive in labels:
            w.writerow(row(rng, positive))


if __name__ == "__main__":
    main()
