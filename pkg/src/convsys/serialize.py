"""On-disk formats: grid functions, samples, moment sets, solution bundles.

Grid functions are a small JSON header next to a raw float64 payload
(interleaved re/im, row-major), with CSV as a slower interop option.
Samples travel as plain CSV plus a JSON sidecar. A solved model is a
directory: manifest.json with the scalar facts (case, constant, tau,
drop counts, residual, config hash) and one grid-function pair per field.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .gridfn import GridFn, GridSpec, make_grid
from .ecf import MomentSet, SampleSet
from .ident import Solution, SupportMask


def config_hash(config: dict) -> str:
    """Stable content hash of a JSON-serializable config."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _spec_header(spec: GridSpec) -> dict:
    return {
        "dim": spec.dim,
        "lo": list(spec.lo),
        "hi": list(spec.hi),
        "n": list(spec.n),
    }


def _spec_from_header(h: dict) -> GridSpec:
    return make_grid(h["dim"], tuple(h["lo"]), tuple(h["hi"]), tuple(h["n"]))


def save_gridfn(fn: GridFn, path: str | Path, fmt: str = "bin") -> Path:
    """Write a GridFn; returns the header path. fmt is 'bin' or 'csv'."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "bin":
        header = path.with_suffix(".json")
        payload = path.with_suffix(".bin")
        inter = np.empty(fn.values.size * 2, dtype=np.float64)
        flat = fn.values.ravel()
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        payload.write_bytes(inter.tobytes())
        header.write_text(
            json.dumps(
                {
                    "kind": "gridfn",
                    "format": "bin",
                    "name": fn.label,
                    "spec": _spec_header(fn.spec),
                    "payload": payload.name,
                },
                indent=2,
            )
        )
        return header
    if fmt == "csv":
        out = path.with_suffix(".csv")
        spec = fn.spec
        mesh = spec.meshgrid() if spec.dim == 2 else (spec.axis(0),)
        cols = [np.asarray(m).ravel() for m in mesh]
        flat = fn.values.ravel()
        data = np.column_stack(cols + [flat.real, flat.imag])
        hdr = ",".join([f"z{k+1}" for k in range(spec.dim)] + ["re", "im"])
        meta = json.dumps({"name": fn.label, "spec": _spec_header(fn.spec)})
        np.savetxt(out, data, delimiter=",", header=hdr + "\n# " + meta, comments="")
        return out
    raise ConfigError(f"unknown gridfn format {fmt!r}")


def load_gridfn(path: str | Path) -> GridFn:
    path = Path(path)
    if path.suffix == ".csv":
        with open(path) as fh:
            fh.readline()
            meta = json.loads(fh.readline().lstrip("# ").strip())
        spec = _spec_from_header(meta["spec"])
        data = np.loadtxt(path, delimiter=",", skiprows=2)
        vals = (data[:, -2] + 1j * data[:, -1]).reshape(spec.shape)
        return GridFn(spec, vals, meta.get("name", "fn"))
    header = json.loads(path.read_text())
    if header.get("kind") != "gridfn":
        raise ConfigError(f"{path} is not a gridfn header")
    spec = _spec_from_header(header["spec"])
    raw = np.frombuffer((path.parent / header["payload"]).read_bytes(), dtype=np.float64)
    vals = (raw[0::2] + 1j * raw[1::2]).reshape(spec.shape)
    return GridFn(spec, vals, header.get("name", "fn"))


def save_sampleset(s: SampleSet, path: str | Path) -> Path:
    """CSV columns z1..zd, x1..xd[, y] plus a .meta.json sidecar."""
    path = Path(path).with_suffix(".csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [s.z[:, k] for k in range(s.dim)] + [s.x[:, k] for k in range(s.dim)]
    names = [f"z{k+1}" for k in range(s.dim)] + [f"x{k+1}" for k in range(s.dim)]
    if s.y is not None:
        cols.append(s.y)
        names.append("y")
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(names), comments="")
    sidecar = path.with_suffix(".meta.json")
    sidecar.write_text(
        json.dumps(
            {
                "kind": "samples",
                "model": s.model,
                "n": s.n,
                "d": s.dim,
                "has_y": s.y is not None,
                "seed": s.seed,
            },
            indent=2,
        )
    )
    return path


def load_sampleset(path: str | Path) -> SampleSet:
    path = Path(path)
    sidecar = path.with_suffix(".meta.json")
    if not sidecar.exists():
        raise ConfigError(f"missing sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    d = meta["d"]
    want = 2 * d + (1 if meta["has_y"] else 0)
    if data.shape[1] != want:
        raise ConfigError(f"{path}: expected {want} columns, found {data.shape[1]}")
    z = data[:, :d]
    x = data[:, d : 2 * d]
    y = data[:, 2 * d] if meta["has_y"] else None
    return SampleSet(meta["model"], z=z, x=x, y=y, seed=meta.get("seed"))


def save_momentset(m: MomentSet, outdir: str | Path) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_gridfn(m.eps1, outdir / "eps1")
    for k, e in enumerate(m.eps2):
        save_gridfn(e, outdir / f"eps2_{k+1}")
    for k, e in enumerate(m.deps1):
        save_gridfn(e, outdir / f"deps1_{k+1}")
    (outdir / "manifest.json").write_text(
        json.dumps(
            {
                "kind": "moments",
                "source": m.source,
                "n_samples": m.n_samples,
                "d": m.eps1.spec.dim,
                "spec": _spec_header(m.eps1.spec),
            },
            indent=2,
        )
    )
    return outdir


def load_momentset(outdir: str | Path) -> MomentSet:
    outdir = Path(outdir)
    manifest = json.loads((outdir / "manifest.json").read_text())
    if manifest.get("kind") != "moments":
        raise ConfigError(f"{outdir} is not a moment-set directory")
    d = manifest["d"]
    eps1 = load_gridfn(outdir / "eps1.json")
    eps2 = tuple(load_gridfn(outdir / f"eps2_{k+1}.json") for k in range(d))
    deps1 = tuple(load_gridfn(outdir / f"deps1_{k+1}.json") for k in range(d))
    return MomentSet(
        eps1=eps1, eps2=eps2, deps1=deps1,
        source=manifest["source"], n_samples=manifest["n_samples"],
    )


def save_solution(sol: Solution, outdir: str | Path, extra: dict | None = None) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_gridfn(sol.gamma, outdir / "gamma")
    save_gridfn(sol.phi, outdir / "phi")
    mask_fn = GridFn(sol.mask.spec, sol.mask.mask.astype(float), "mask")
    save_gridfn(mask_fn, outdir / "mask")
    manifest = {
        "kind": "solution",
        "case": sol.case,
        "c": [complex(sol.c).real, complex(sol.c).imag],
        "tau": sol.mask.tau,
        "identified": sol.identified,
        "mask_points": sol.mask.count,
        "dropped_points": sol.meta.get("dropped_points"),
        "regularized": sol.meta.get("regularized"),
    }
    try:
        manifest["residual"] = sol.residual()
    except Exception:
        manifest["residual"] = None
    if extra:
        manifest.update(extra)
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return outdir


def load_solution(outdir: str | Path) -> Solution:
    outdir = Path(outdir)
    manifest = json.loads((outdir / "manifest.json").read_text())
    if manifest.get("kind") != "solution":
        raise ConfigError(f"{outdir} is not a solution directory")
    gamma = load_gridfn(outdir / "gamma.json")
    phi = load_gridfn(outdir / "phi.json")
    mask_fn = load_gridfn(outdir / "mask.json")
    mask = SupportMask(mask_fn.spec, mask_fn.values.real > 0.5, manifest["tau"])
    c = complex(manifest["c"][0], manifest["c"][1])
    return Solution(
        gamma=gamma, phi=phi, case=manifest["case"], c=c, mask=mask,
        identified=manifest["identified"],
        meta={"dropped_points": manifest.get("dropped_points"),
              "regularized": manifest.get("regularized")},
    )
