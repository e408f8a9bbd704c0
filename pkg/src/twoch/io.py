"""CSV and manifest output for experiment results."""

from __future__ import annotations

import dataclasses
import datetime
import os


def _num(v) -> str:
    return repr(float(v))


def _write(path, lines):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as err:
        raise OSError(err.errno, f"cannot write {path}: {err.strerror}") from None


def write_outputs(result, path) -> list:
    """Write snapshots, atoms, diagnostics and a manifest under ``path``.

    Returns the written file paths. Only the manifest's ``timestamp`` line
    differs between reruns of the same configuration.
    """
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as err:
        raise OSError(err.errno, f"cannot create {path}: {err.strerror}") from None
    written = []
    atoms = ["t,position,mass"]
    diag = ["t,energy,g_defect,r_defect,min_yxi,pq_defect"]
    for i, rec in enumerate(result.records):
        name = os.path.join(path, f"snapshot_{i:04d}.csv")
        lines = ["x,u,rho,mu_density"]
        lines += [",".join(map(_num, row))
                  for row in zip(rec.x, rec.u, rec.rho, rec.mu_density)]
        _write(name, lines)
        written.append(name)
        atoms += [f"{_num(rec.t)},{_num(p)},{_num(m)}" for p, m in rec.atoms]
        diag.append(",".join(_num(v) for v in (
            rec.t, rec.energy, rec.g_defect, rec.r_defect, rec.min_yxi, rec.pq_defect)))
    for name, lines in (("atoms.csv", atoms), ("diagnostics.csv", diag)):
        _write(os.path.join(path, name), lines)
        written.append(os.path.join(path, name))
    if result.vanishing:
        rows = ["n,k,t,sup_distance"]
        rows += [f"{n},{_num(k)},{_num(t)},{_num(d)}" for n, k, t, d in result.vanishing]
        _write(os.path.join(path, "vanishing_density.csv"), rows)
        written.append(os.path.join(path, "vanishing_density.csv"))
    manifest = os.path.join(path, "manifest.txt")
    _write(manifest, manifest_lines(result))
    written.append(manifest)
    return written


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ", ".join(_num(x) for x in v)
    if isinstance(v, float):
        return _num(v)
    return str(v)


def manifest_lines(result):
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"timestamp = {stamp}"]
    for f in dataclasses.fields(result.config):
        lines.append(f"{f.name} = {_fmt(getattr(result.config, f.name))}")
    lines.append(f"alpha = {_num(result.alpha)}")
    lines.append(f"kappa_prime = {_num(result.kappa_prime)}")
    for name, (value, loc) in result.summary.entries.items():
        lines.append(f"max_{name} = {_num(value)}" if name != "min_yxi" else f"min_yxi = {_num(value)}")
    for name, flag in result.summary.flags.items():
        lines.append(f"ok_{name} = {str(bool(flag)).lower()}")
    lines.append(f"snapshots = {len(result.records)}")
    return lines
