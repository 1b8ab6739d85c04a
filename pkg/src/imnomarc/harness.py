"""Monte Carlo experiment engine: transmit -> channel -> detect loops over SNR
grids with per-user bit-error accounting and reproducible, block-seeded RNG.

Every OFDM block (one batch of L subcarriers) gets its own RNG stream derived
from (master seed, SNR point, block index), so results are bit-exact for any
worker count. Accumulation is a plain sum of counters; the stop rule is
evaluated on fixed-size batches of blocks so the granularity is also
worker-independent.
"""

from __future__ import annotations

import csv
import datetime
import json
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import apply_channel, draw_channel
from .constellation import build_constellation
from .detectors import ml_block, sic_block
from .superposition import (DEFAULT_ALPHABET_CAP, SuperAlphabet, SystemConfig,
                            build_super_alphabet, spectral_efficiency,
                            user_bit_positions)

SCHEMES = ("imnomarc", "pdnoma", "ofdm")
DETECTORS = ("ml", "sic")
BATCH_BLOCKS = 16  # stop-rule granularity, fixed so worker count cannot change results


@dataclass
class ExperimentSpec:
    """One sweep definition: scheme, detector, SNR grid, and stop rule."""

    scheme: str = "imnomarc"
    cfg: SystemConfig = field(default_factory=SystemConfig)
    detector: str = "ml"
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    n_subcarriers: int = 128
    max_bits: int = 10_000_000
    min_bit_errors: int = 200
    master_seed: int = 0
    ofdm_order: int = 8
    ofdm_family: str = "QAM"
    noiseless: bool = False
    n_workers: int = 1
    alphabet_cap: int = DEFAULT_ALPHABET_CAP

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        self.snr_grid_db = tuple(float(v) for v in self.snr_grid_db)
        if any(a >= b for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        if self.max_bits < 10 * self.min_bit_errors:
            raise ValueError("max_bits must be at least 10x min_bit_errors")
        if self.n_subcarriers < 1 or self.n_workers < 1:
            raise ValueError("n_subcarriers and n_workers must be positive")


@dataclass
class BerRecord:
    scheme: str
    detector: str
    user: str
    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    wall_time: float = 0.0


class _OfdmAlphabet:
    """Single-user alphabet: plain constellation scaled to the power budget."""

    def __init__(self, order, family, total_power):
        const = build_constellation(order, family)
        self.x = const.points * np.sqrt(total_power)
        self.bits = np.array([const.bits_for_index(i) for i in range(order)],
                             dtype=np.uint8)


class _PointContext:
    """Everything a block worker needs, built once per experiment."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        if spec.scheme == "ofdm":
            self.cfg = None
            self.alphabet = _OfdmAlphabet(spec.ofdm_order, spec.ofdm_family,
                                          spec.cfg.total_power)
            self.total_power = spec.cfg.total_power
            self.n_channels = 1
            self.channels = [("1", self.alphabet.bits.shape[1], None)]
            return
        cfg = spec.cfg if spec.scheme == "imnomarc" else replace(spec.cfg, im_enabled=False)
        self.cfg = cfg
        self.alphabet = build_super_alphabet(cfg, cap=spec.alphabet_cap)
        self.total_power = cfg.total_power
        b = cfg.bits_per_symbol
        self.bits_lut = np.array(
            [cfg.constellation.bits_for_index(i) for i in range(cfg.mod_order)],
            dtype=np.uint8)
        track_index = cfg.n_index_bits > 0
        virtual = track_index and cfg.index_user_mode == "virtual"
        self.n_channels = cfg.n_users + (1 if virtual else 0)
        self.channels = [(str(u), b, u) for u in range(1, cfg.n_users + 1)]
        if track_index:
            self.channels.append(("index", cfg.n_index_bits, None))


def _popcount(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width)
    return ((values[:, None] >> shifts[None, :]) & 1).sum(axis=1)


def _run_block(ctx: _PointContext, snr_db: float, block: int) -> dict[str, int]:
    spec = ctx.spec
    L = spec.n_subcarriers
    ss = np.random.SeedSequence(entropy=spec.master_seed,
                                spawn_key=(int(round(snr_db * 1e6)) & 0xFFFFFFFF, block))
    rng = np.random.default_rng(ss)
    eff_snr = np.inf if spec.noiseless else snr_db

    tx_entry = rng.integers(0, len(ctx.alphabet.x), size=L)
    tx_bits = ctx.alphabet.bits[tx_entry]
    x = ctx.alphabet.x[tx_entry]
    ch = draw_channel(ctx.n_channels, L, eff_snr, ctx.total_power, rng)

    errors: dict[str, int] = {}
    if ctx.cfg is None:  # OFDM baseline: ML over the plain constellation
        y = apply_channel(x, ch, 1, rng)
        idx, _ = ml_block(y, ch.h[0], ctx.alphabet)
        errors["1"] = int(np.count_nonzero(ctx.alphabet.bits[idx] != tx_bits))
        return errors

    cfg = ctx.cfg
    alphabet: SuperAlphabet = ctx.alphabet
    tx_phi = alphabet.phis[tx_entry]
    virtual = cfg.n_index_bits > 0 and cfg.index_user_mode == "virtual"
    index_slice = np.fromiter(user_bit_positions(cfg, "index"), dtype=int) \
        if cfg.n_index_bits else None

    last_user_index_errors = None
    for u in range(1, cfg.n_users + 1):
        y = apply_channel(x, ch, u, rng)
        own = np.fromiter(user_bit_positions(cfg, u), dtype=int)
        if spec.detector == "ml":
            idx, _ = ml_block(y, ch.h[u - 1], alphabet)
            rx_bits = alphabet.bits[idx]
            errors[str(u)] = int(np.count_nonzero(rx_bits[:, own] != tx_bits[:, own]))
            if u == cfg.n_users and cfg.n_index_bits:
                last_user_index_errors = int(np.count_nonzero(
                    rx_bits[:, index_slice] != tx_bits[:, index_slice]))
        else:
            sym_idx, _, phi_hat, _ = sic_block(y, ch.h[u - 1], cfg, u)
            rx_own = ctx.bits_lut[sym_idx[:, u - 1]]
            errors[str(u)] = int(np.count_nonzero(rx_own != tx_bits[:, own]))
            if u == cfg.n_users and cfg.n_index_bits and phi_hat is not None:
                last_user_index_errors = int(
                    _popcount(np.bitwise_xor(phi_hat, tx_phi), cfg.n_index_bits).sum())

    if cfg.n_index_bits:
        if virtual:
            y = apply_channel(x, ch, cfg.n_users + 1, rng)
            h_v = ch.h[cfg.n_users]
            if spec.detector == "ml":
                idx, _ = ml_block(y, h_v, alphabet)
                errors["index"] = int(np.count_nonzero(
                    alphabet.bits[idx][:, index_slice] != tx_bits[:, index_slice]))
            else:
                _, _, phi_hat, _ = sic_block(y, h_v, cfg, cfg.n_users + 1)
                errors["index"] = int(
                    _popcount(np.bitwise_xor(phi_hat, tx_phi), cfg.n_index_bits).sum())
        else:
            errors["index"] = last_user_index_errors
    return errors


def run_point(spec: ExperimentSpec, snr_db: float) -> list[BerRecord]:
    """Simulate one SNR point until the stop rule fires for every tracked user."""
    ctx = _PointContext(spec)
    L = spec.n_subcarriers
    totals = {name: 0 for name, _, _ in ctx.channels}
    blocks_run = 0
    t0 = time.perf_counter()

    def done() -> bool:
        for name, nbits, _ in ctx.channels:
            sent = blocks_run * L * nbits
            if totals[name] < spec.min_bit_errors and sent < spec.max_bits:
                return False
        return True

    while not done():
        batch = range(blocks_run, blocks_run + BATCH_BLOCKS)
        if spec.n_workers > 1:
            with ThreadPoolExecutor(max_workers=spec.n_workers) as pool:
                results = list(pool.map(lambda b: _run_block(ctx, snr_db, b), batch))
        else:
            results = [_run_block(ctx, snr_db, b) for b in batch]
        for res in results:
            for name, errs in res.items():
                totals[name] += errs
        blocks_run += BATCH_BLOCKS

    elapsed = time.perf_counter() - t0
    records = []
    for name, nbits, _ in ctx.channels:
        sent = blocks_run * L * nbits
        records.append(BerRecord(
            scheme=spec.scheme, detector=spec.detector, user=name,
            snr_db=snr_db, bits_sent=sent, bit_errors=totals[name],
            ber=totals[name] / sent, wall_time=elapsed))
    return records


def _version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             cwd=Path(__file__).parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0:
            return f"{__version__}+{out.stdout.strip()}"
    except OSError:
        pass
    return __version__


def spec_to_dict(spec: ExperimentSpec) -> dict:
    return asdict(spec)


def spec_from_dict(d: dict) -> ExperimentSpec:
    d = dict(d)
    cfg = dict(d.pop("cfg"))
    rotation = cfg.pop("rotation")
    from .constellation import RotationSet
    cfg["rotation"] = RotationSet(tuple(rotation["angles"]))
    cfg["power_coeffs"] = tuple(cfg["power_coeffs"])
    d["cfg"] = SystemConfig(**cfg)
    d["snr_grid_db"] = tuple(d["snr_grid_db"])
    return ExperimentSpec(**d)


def run_sweep(spec: ExperimentSpec) -> tuple[list[BerRecord], dict]:
    """Run every grid point; returns records plus a reproducibility manifest."""
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    records: list[BerRecord] = []
    points: dict[str, float] = {}
    for snr_db in spec.snr_grid_db:
        recs = run_point(spec, snr_db)
        records.extend(recs)
        points[f"{snr_db:g}"] = recs[0].wall_time if recs else 0.0
    manifest = {
        "spec": spec_to_dict(spec),
        "master_seed": spec.master_seed,
        "version": _version_string(),
        "started_at": started,
        "points": points,
    }
    return records, manifest


CSV_HEADER = "scheme,detector,user,snr_db,bits_sent,bit_errors,ber"


def persist(records: list[BerRecord], manifest: dict, path) -> tuple[Path, Path]:
    """Write results.csv and manifest.json under ``path``; overwrites in place."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    csv_path = path / "results.csv"
    with open(csv_path, "w", newline="") as f:
        f.write(CSV_HEADER + "\n")
        for r in records:
            f.write(f"{r.scheme},{r.detector},{r.user},{r.snr_db:g},"
                    f"{r.bits_sent},{r.bit_errors},{r.ber:.5e}\n")
    manifest_path = path / "manifest.json"
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return csv_path, manifest_path


def load_results(csv_path) -> list[BerRecord]:
    records = []
    with open(csv_path, newline="") as f:
        for row in csv.DictReader(f):
            records.append(BerRecord(
                scheme=row["scheme"], detector=row["detector"], user=row["user"],
                snr_db=float(row["snr_db"]), bits_sent=int(row["bits_sent"]),
                bit_errors=int(row["bit_errors"]), ber=float(row["ber"])))
    return records
