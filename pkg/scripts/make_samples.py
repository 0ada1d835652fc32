"""Regenerate the synthetic sample panels and configs under ``samples/``.

The panels are invented, seeded and small. They exercise the pipelines;
they are not real regional data.
"""
import json
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(os.path.dirname(HERE), "samples")


def _write(name, text):
    with open(os.path.join(OUT, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(str(v) for v in r))
    return "\n".join(lines) + "\n"


def insure_panel(seed=7):
    rng = np.random.default_rng(seed)
    years = np.arange(2000, 2023)
    t = years - 2000
    weather = np.round(18 + 0.9 * t + rng.normal(0, 3, t.size)).clip(1)
    weather[13] = 52  # extreme year that also produced the loss below
    lw = np.log(weather + 1)
    pop = np.round(np.exp(8.9 + 0.012 * t - 0.05 * lw + rng.normal(0, 0.004, t.size)), 1)
    gdp = np.round(np.exp(10.0 + 0.07 * t - 0.19 * lw + rng.normal(0, 0.01, t.size)), 0)
    crop = np.round(np.exp(7.2 - 0.3 * lw + rng.normal(0, 0.02, t.size)), 1)
    premium = np.round(120 * 1.08 ** t, 2)
    ratio = 0.45 + 0.01 * (weather - weather.mean()) + rng.normal(0, 0.04, t.size)
    ratio[13] = 1.18  # one loss year
    payout = np.round(premium * ratio, 2)
    rows = zip(years, weather.astype(int), pop, gdp.astype(int), crop, premium, payout)
    return _csv(["year", "weather_days", "population", "gdp_per_capita", "crop",
                 "premium", "payout"], rows)


CITIES = ["Hangzhou", "Ningbo", "Wenzhou", "Shaoxing", "Huzhou", "Jiaxing", "Jinhua",
          "Quzhou", "Zhoushan", "Taizhou", "Lishui"]


def develop_panel(seed=11):
    rng = np.random.default_rng(seed)
    good = np.array([1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
    n = len(CITIES)
    weather = np.round(30 - 8 * good + rng.normal(0, 2, n), 1)
    pop = np.round(500 + 500 * good + rng.normal(0, 80, n), 0)
    gdp = np.round(9 + 4 * good + rng.normal(0, 1, n), 2)
    pco = np.round(0.55 + 0.25 * good + rng.normal(0, 0.05, n), 3)
    arp = np.round(3 + 2 * good + rng.normal(0, 0.4, n), 2)
    bench = np.round(0.45 + 0.3 * good + rng.normal(0, 0.05, n), 4)
    rows = zip(CITIES, weather, pop, gdp, pco, arp, bench)
    return _csv(["city", "weather_days", "population", "gdp_per_capita", "pco", "arp",
                 "ssc_probability"], rows)


LANDMARKS = [
    # name, years standing, floor space (k m2), annual tourists (10k), documents, cultural
    ("Mogao Caves", 1650, 20, 200, 950, 10),
    ("Palace Museum", 600, 720, 1900, 1200, 10),
    ("Terracotta Warriors", 2200, 56, 900, 800, 10),
    ("Potala Palace", 1350, 130, 160, 420, 8),
    ("Humble Administrator's Garden", 510, 52, 300, 260, 8),
    ("Mountain Resort", 320, 5640, 240, 300, 7),
    ("Yungang Grottoes", 1550, 18, 300, 520, 10),
    ("National Museum", 110, 200, 700, 330, 9),
    ("Yellow Crane Tower", 1800, 4, 260, 240, 6),
    ("Penglai Pavilion", 960, 19, 180, 150, 8),
    ("Wuzhen", 1300, 710, 900, 180, 6),
    ("Leshan Giant Buddha", 1220, 12, 400, 350, 9),
    ("Oriental Pearl Tower", 30, 100, 400, 60, 4),
    ("Shanghai Disneyland", 8, 3900, 1100, 40, 3),
    ("Shenzhen Happy Valley", 25, 350, 300, 20, 3),
    ("Chengdu Happy Valley", 16, 470, 250, 15, 3),
]

AHP_MATRIX = "1,3,2,4,1\n1/3,1,1/2,2,1/3\n1/2,2,1,3,1/4\n1/4,1/2,1/3,1,1/2\n1,3,4,2,1\n"


def main():
    os.makedirs(OUT, exist_ok=True)
    _write("insure_panel.csv", insure_panel())
    _write("insure.json", json.dumps({
        "pipeline": "insure",
        "inputs": {"panel": "insure_panel.csv"},
        "schema": {
            "features": ["weather_days", "population", "gdp_per_capita", "crop"],
            "weather": "weather_days",
            "npm": {"premium": "premium", "payout": "payout"},
            "label_policy": {"lowest_npm": 1},
        },
        "params": {
            "C": 10.0,
            "smote": {"neighbor_pool": "majority", "n_synthetic": 23, "k": 5},
            "cv_folds": 5,
            "lambda_grid": {"start": 0.0, "stop": 2.0, "num": 81},
        },
        "seed": 2024,
        "output_dir": "out/insure",
    }, indent=2) + "\n")

    _write("develop_panel.csv", develop_panel())
    _write("develop.json", json.dumps({
        "pipeline": "develop",
        "inputs": {"panel": "develop_panel.csv"},
        "schema": {
            "features": ["weather_days", "population", "gdp_per_capita", "pco", "arp"],
            "directions": {"weather_days": "negative"},
            "population": "population",
            "benchmark_column": "ssc_probability",
        },
        "params": {"k_percent": 15},
        "seed": 2024,
        "output_dir": "out/develop",
    }, indent=2) + "\n")

    _write("landmarks.csv", _csv(
        ["landmark", "existing_time", "floor_space", "annual_tourists", "documents",
         "cultural_value"], LANDMARKS))
    _write("ahp_matrix.csv", AHP_MATRIX)
    _write("preserve.json", json.dumps({
        "pipeline": "preserve",
        "inputs": {"panel": "landmarks.csv", "ahp_matrix": "ahp_matrix.csv"},
        "schema": {"features": ["existing_time", "floor_space", "annual_tourists",
                                "documents", "cultural_value"]},
        "params": {"alpha": 0.5,
                   "robustness": {"sigma": 0.5, "trials": 200, "recompute_weights": True}},
        "seed": 2024,
        "output_dir": "out/preserve",
    }, indent=2) + "\n")


if __name__ == "__main__":
    main()
