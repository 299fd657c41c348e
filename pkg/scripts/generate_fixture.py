"""Regenerate the bundled synthetic climate fixture.

Four fictional stations, monthly records over 1955-01..2017-12. Each
station's precipitation is driven by a latent AR(1) process pushed
through seasonal gamma quantiles, so adjacent months agree far more
than chance (a strong lag-1 kappa signal that decays with lag), while
temperature is a seasonal sinusoid with noise. A handful of months are
left missing to exercise gap handling.

Usage: python scripts/generate_fixture.py [output.csv]
Writes src/droughtcast/data/synthetic_climate.csv by default.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

START_YEAR = 1955
YEARS = 63
MONTHS = YEARS * 12

# station -> (seed, AR coefficient, winter-wet?, mean precip scale, temp (mid, swing))
STATIONS = {
    "alder": (101, 0.80, False, 90.0, (8.0, 14.0)),
    "basalt": (202, 0.75, False, 55.0, (12.0, 10.0)),
    "cirrus": (303, 0.70, True, 120.0, (2.0, 12.0)),
    "dune": (404, 0.65, False, 30.0, (18.0, 9.0)),
}


def month_shape(month: int) -> float:
    """Gamma shape; wetter months are less skewed."""
    return 2.0 + 1.5 * np.cos((month - 7) * np.pi / 6.0) ** 2


def month_mean(month: int, scale: float, winter_wet: bool) -> float:
    peak = 1 if winter_wet else 7
    seasonal = 0.35 + 0.65 * (0.5 + 0.5 * np.cos((month - peak) * np.pi / 6.0))
    return scale * seasonal


def simulate(name: str) -> list[tuple[str, str, str, str]]:
    from scipy import stats

    seed, phi, winter_wet, scale, (t_mid, t_swing) = STATIONS[name]
    rng = np.random.default_rng(seed)
    z = np.empty(MONTHS)
    z[0] = rng.standard_normal()
    noise = rng.standard_normal(MONTHS) * np.sqrt(1.0 - phi * phi)
    for i in range(1, MONTHS):
        z[i] = phi * z[i - 1] + noise[i]
    u = stats.norm.cdf(z)

    missing_rows = set(rng.choice(np.arange(60, MONTHS - 12), size=4, replace=False))
    empty_precip = set(rng.choice(sorted(set(range(60, MONTHS - 12)) - missing_rows), size=3, replace=False))
    empty_temp = set(rng.choice(sorted(set(range(60, MONTHS - 12)) - missing_rows - empty_precip), size=2, replace=False))

    rows = []
    for i in range(MONTHS):
        if i in missing_rows:
            continue
        year, month = START_YEAR + i // 12, i % 12 + 1
        period = f"{year:04d}-{month:02d}"
        shape = month_shape(month)
        mean = month_mean(month, scale, winter_wet)
        precip = stats.gamma(shape, scale=mean / shape).ppf(u[i])
        precip = max(float(precip), 0.1)
        temp = t_mid + t_swing * np.cos((month - 7) * np.pi / 6.0) + rng.normal(0.0, 1.2)
        p_cell = "" if i in empty_precip else f"{precip:.1f}"
        t_cell = "" if i in empty_temp else f"{temp:.1f}"
        rows.append((name, period, p_cell, t_cell))
    return rows


def main() -> None:
    default = Path(__file__).resolve().parent.parent / "src/droughtcast/data/synthetic_climate.csv"
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else default
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["station,period,precip_mm,tmean_c"]
    for name in STATIONS:
        lines.extend(",".join(row) for row in simulate(name))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(lines) - 1} rows)")


if __name__ == "__main__":
    main()
