"""Deterministic demo datasets.

The engine is demonstrated on desk-scale tabular data: a medical-insurance
cost table, a student-performance table, a playlist interaction log, a
subscription churn table, and a small real-estate valuation sample.  The
first four are synthesized here with seeded generators whose coefficient
structure and marginals follow the well-known public datasets of the same
shape, so regression quality and example predictions land in the documented
ranges without shipping third-party data files.
"""

from __future__ import annotations

import io

import numpy as np

# linear structure of the public medical-cost table (1338 rows): strong
# smoker effect, age/bmi/children slopes, small sex/region offsets
_INSURANCE_COEF = {
    "intercept": -11938.5,
    "age": 256.86,
    "bmi": 339.19,
    "children": 475.50,
    "smoker_yes": 23848.53,
    "sex_male": -131.31,
    "region": {"northeast": 0.0, "northwest": -352.96, "southeast": -1035.02, "southwest": -960.05},
    "noise_std": 6060.0,
    "min_charge": 1121.87,
}


def medical_insurance_csv(rows: int = 1338, seed: int = 7) -> str:
    """Insurance-cost table: age, sex, bmi, children, smoker, region, charges."""
    rng = np.random.default_rng(seed)
    regions = ("northeast", "northwest", "southeast", "southwest")
    out = io.StringIO()
    out.write("age,sex,bmi,children,smoker,region,charges\n")
    c = _INSURANCE_COEF
    for _ in range(rows):
        age = int(rng.integers(18, 65))
        sex = "male" if rng.random() < 0.505 else "female"
        bmi = float(np.clip(rng.normal(30.66, 6.1), 16.0, 53.0))
        children = int(rng.choice([0, 1, 2, 3, 4, 5], p=[0.43, 0.24, 0.18, 0.12, 0.02, 0.01]))
        smoker = "yes" if rng.random() < 0.205 else "no"
        region = regions[int(rng.integers(4))]
        charges = (
            c["intercept"]
            + c["age"] * age
            + c["bmi"] * bmi
            + c["children"] * children
            + (c["smoker_yes"] if smoker == "yes" else 0.0)
            + (c["sex_male"] if sex == "male" else 0.0)
            + c["region"][region]
            + rng.normal(0.0, c["noise_std"])
        )
        charges = max(charges, c["min_charge"])
        out.write(f"{age},{sex},{bmi:.2f},{children},{smoker},{region},{charges:.2f}\n")
    return out.getvalue()


# near-noiseless linear structure of the public student-performance table
_STUDENT_COEF = (2.8530, 1.0184, 0.6129, 0.4806, 0.1938)
_STUDENT_INTERCEPT = -34.0756


def student_performance_csv(rows: int = 10000, seed: int = 7) -> str:
    """Student outcomes: study hours, previous scores, activities, sleep,
    practice papers, and the resulting performance index."""
    rng = np.random.default_rng(seed)
    out = io.StringIO()
    out.write(
        "Hours Studied,Previous Scores,Extracurricular Activities,"
        "Sleep Hours,Sample Question Papers Practiced,Performance Index\n"
    )
    b1, b2, b3, b4, b5 = _STUDENT_COEF
    for _ in range(rows):
        hours = int(rng.integers(1, 10))
        prev = int(rng.integers(40, 100))
        extra = "Yes" if rng.random() < 0.495 else "No"
        sleep = int(rng.integers(4, 10))
        papers = int(rng.integers(0, 10))
        perf = (
            _STUDENT_INTERCEPT
            + b1 * hours
            + b2 * prev
            + b3 * (1.0 if extra == "Yes" else 0.0)
            + b4 * sleep
            + b5 * papers
            + rng.normal(0.0, 2.04)
        )
        perf = float(np.clip(perf, 10.0, 100.0))
        out.write(f"{hours},{prev},{extra},{sleep},{papers},{perf:.1f}\n")
    return out.getvalue()


def playlist_interactions_csv(seed: int = 7) -> str:
    """User-playlist interaction log with per-genre blocks; includes user 4407."""
    rng = np.random.default_rng(seed)
    genres = ("rock", "jazz", "piano", "dance")
    playlists = {g: [f"{g}_mix_{j:02d}" for j in range(8)] for g in genres}
    out = io.StringIO()
    out.write("user_id,playlistname\n")
    # each user logs only 4-6 of the 8 in-genre playlists (twice, as repeat
    # listens), so the model has unobserved in-genre items left to recommend
    for user in range(4400, 4480):
        genre = genres[user % len(genres)]
        count = int(rng.integers(4, 7))
        chosen = rng.choice(len(playlists[genre]), size=count, replace=False)
        for _ in range(2):
            for j in sorted(chosen):
                out.write(f"{user},{playlists[genre][j]}\n")
    return out.getvalue()


def subscription_csv(rows: int = 2000, seed: int = 7) -> str:
    """Binary churn table: tenure, fee, tickets, plan, and subscribed flag."""
    rng = np.random.default_rng(seed)
    plans = ("basic", "standard", "premium")
    out = io.StringIO()
    out.write("tenure_months,monthly_fee,support_tickets,plan,subscribed\n")
    for _ in range(rows):
        tenure = int(rng.integers(1, 73))
        fee = float(rng.uniform(10.0, 120.0))
        tickets = int(rng.poisson(1.5))
        plan = plans[int(rng.integers(3))]
        z = 0.06 * tenure - 0.025 * fee - 0.45 * tickets + (0.8 if plan == "premium" else 0.0)
        prob = 1.0 / (1.0 + np.exp(-z))
        subscribed = 1 if rng.random() < prob else 0
        out.write(f"{tenure},{fee:.2f},{tickets},{plan},{subscribed}\n")
    return out.getvalue()


# first ten records of the public real-estate valuation sample (Sindian
# district housing transactions), used for ingestion/profile demos
REAL_ESTATE_CSV = """No,X1 transaction date,X2 house age,X3 distance to the nearest MRT station,X4 number of convenience stores,X5 latitude,X6 longitude,Y house price of unit area
1,2012.917,32,84.87882,10,24.98298,121.54024,37.9
2,2012.917,19.5,306.5947,9,24.98034,121.53951,42.2
3,2013.583,13.3,561.9845,5,24.98746,121.54391,47.3
4,2013.500,13.3,561.9845,5,24.98746,121.54391,54.8
5,2012.833,5,390.5684,5,24.97937,121.54245,43.1
6,2012.667,7.1,2175.03,3,24.96305,121.51254,32.1
7,2012.667,34.5,623.4731,7,24.97933,121.53642,40.3
8,2013.417,20.3,287.6025,6,24.98042,121.54228,46.7
9,2013.500,31.7,5512.038,1,24.95095,121.48458,18.8
10,2013.417,17.9,1783.18,3,24.96731,121.51486,22.1
"""
