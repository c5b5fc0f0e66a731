# -*- coding: utf-8 -*-
"""
src/utils/io.py
Shared path setup, environment loading, logging and small file writers.
"""

import json
import logging
import os

import numpy as np
import pandas as pd
from dotenv import load_dotenv

# --- 1. ROBUST PATH SETUP ---
# Finds the project root relative to this file (src/utils -> root)
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
ROOT_DIR = os.path.abspath(os.path.join(BASE_DIR, "..", ".."))
ENV_PATH = os.path.join(ROOT_DIR, ".env")

load_dotenv(dotenv_path=ENV_PATH)

MODEL_DIR = os.path.join(ROOT_DIR, "models")
TOOL_VERSION = "0.3.0"


def output_root() -> str:
    """Output root for run bundles; PALP_BENCH_OUT overrides the default."""
    return os.getenv("PALP_BENCH_OUT") or os.path.join(ROOT_DIR, "runs")


# --- 2. LOGGING ---

_CONFIGURED = False


def get_logger(name: str) -> logging.Logger:
    global _CONFIGURED
    if not _CONFIGURED:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(message)s"))
        root = logging.getLogger("palp_bench")
        root.addHandler(handler)
        root.setLevel(logging.INFO)
        root.propagate = False
        _CONFIGURED = True
    short = name.split(".")[-1]
    return logging.getLogger(f"palp_bench.{short}")


def set_verbose(verbose: bool) -> None:
    get_logger("io")
    logging.getLogger("palp_bench").setLevel(logging.DEBUG if verbose else logging.INFO)


# --- 3. WRITERS ---

def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_json(payload: dict, path: str) -> str:
    with open(path, "w") as f:
        json.dump(payload, f, indent=4, sort_keys=True)
    return path


def read_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def write_csv(df: pd.DataFrame, path: str) -> str:
    # repr floats so a re-read frame is bitwise identical
    df.to_csv(path, index=False, lineterminator="\n")
    return path


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_pgm(intensities: np.ndarray, path: str) -> str:
    """Binary portable graymap, maxval 255, row-major."""
    img = np.clip(np.asarray(intensities, dtype=float), 0.0, 1.0)
    data = np.round(img * 255.0).astype(np.uint8)
    height, width = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(data.tobytes(order="C"))
    return path


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    magic, size, maxval, data = raw.split(b"\n", 3)
    if magic != b"P5":
        raise ValueError(f"{path} is not a binary PGM file")
    width, height = (int(v) for v in size.split())
    maxval = int(maxval)
    data = np.frombuffer(data, dtype=np.uint8, count=width * height)
    return data.reshape(height, width).astype(float) / maxval
