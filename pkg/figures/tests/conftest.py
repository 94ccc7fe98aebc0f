import csv
import subprocess
import sys

import pytest

RUN_COLUMNS = [
    "scheme", "n_clients", "arrival_fps", "delta_db", "sic_db", "seed",
    "tput_total_mbps", "tput_down_mbps", "tput_up_mbps", "collision_prob",
    "fd_time_frac", "hd_time_frac", "mean_contention_us",
]
CLIENT_COLUMNS = [
    "scheme", "n_clients", "arrival_fps", "delta_db", "sic_db", "seed",
    "client", "uplink_tx_count", "uplink_share",
]
PAIR_COLUMNS = [
    "scheme", "n_clients", "arrival_fps", "delta_db", "sic_db", "seed",
    "down", "up", "p_assigned", "freq_realized",
]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


@pytest.fixture
def runs_csv(tmp_path):
    rows = []
    for scheme, base in (("proposed", 30.0), ("halfduplex", 10.0), ("random", 12.0)):
        for n in (10, 20, 30):
            for fps in (2, 16, 128, 1024):
                for seed in (1, 2):
                    t = base * n / 30 * (0.4 + 0.6 * min(fps, 64) / 64) + 0.1 * seed
                    rows.append(
                        [scheme, n, fps, 5.0, 110.0, seed, t, 0.55 * t, 0.45 * t,
                         0.05 if scheme == "proposed" else 0.3,
                         0.7 if scheme == "proposed" else 0.0,
                         0.3 if scheme == "proposed" else 1.0,
                         30.0 + seed]
                    )
    for delta in (0, 3, 5, 7, 9):
        for seed in (1, 2):
            rows.append(["proposed", 30, 2000, delta, 110.0, seed,
                         20 + delta, 15 - 0.2 * delta, 5 + 1.2 * delta,
                         0.05, 0.7, 0.3, 30.0])
    for sic in (85, 95, 110):
        for seed in (1, 2):
            rows.append(["proposed", 30, 2000, 5.0, sic, seed,
                         10 + 0.2 * sic, 6, 4 + 0.1 * sic, 0.05, 0.6, 0.4, 30.0])
    path = tmp_path / "runs.csv"
    write_csv(path, RUN_COLUMNS, rows)
    return path


@pytest.fixture
def clients_csv(tmp_path):
    rows = []
    for scheme in ("proposed", "maxrate"):
        for c in range(1, 31):
            share = 1 / 30 if scheme == "proposed" else (0.9 if c == 1 else 0.1 / 29)
            rows.append([scheme, 30, 2000, 5.0, 110.0, 1, c, int(share * 1000), share])
    path = tmp_path / "clients.csv"
    write_csv(path, CLIENT_COLUMNS, rows)
    return path


@pytest.fixture
def pairs_csv(tmp_path):
    rows = []
    import numpy as np

    rng = np.random.default_rng(0)
    for k in range(60):
        p = float(rng.uniform(0.001, 0.1))
        rows.append(["proposed", 30, 2000, 5.0, 110.0, 1, k % 30 + 1, (k + 5) % 30,
                     p, p * float(rng.uniform(0.97, 1.03))])
    path = tmp_path / "pairs.csv"
    write_csv(path, PAIR_COLUMNS, rows)
    return path


@pytest.fixture(scope="session")
def real_scenario(tmp_path_factory):
    """A real simulator run through its public CLI; the figures tool only
    ever sees the CSV files."""
    out_dir = tmp_path_factory.mktemp("scenario")
    runs = out_dir / "runs.csv"
    clients = out_dir / "clients.csv"
    pairs = out_dir / "pairs.csv"
    cmd = [
        sys.executable, "-m", "fdmac.cli",
        "--scheme", "proposed", "--clients", "30", "--epochs", "200",
        "--seeds", "1", "--out", str(runs),
        "--per-client-out", str(clients), "--per-pair-out", str(pairs),
        "--quiet",
    ]
    subprocess.run(cmd, check=True, timeout=600)
    return {"runs": runs, "clients": clients, "pairs": pairs}
