"""Frozen CSV schemas for run artifacts.

Column layouts are part of the package contract and are documented in the
README; floats are written with 17 significant digits so values round-trip
exactly through text.

  trajectory.csv   replicate,t,n_x,n_y
  survival.csv     t,survival,se,n_replicates
  events.csv       replicate,t,channel,n_removed,n_created,removed,created
                   (positions: lesions joined by '|', coordinates by ' ')
  snapshots.csv    replicate,t,kind,x,y[,z]
  master.csv       t,survival,mean_x,mean_y,mass
  moments.csv      t,x_bar,y_bar
  limit.csv        t,u_x,u_y
  limit_fields.csv t,cell,x,y[,z],u_x,u_y
  chem_fields.csv  t,cell,x,y[,z],<species...>
  occupancy.csv    ix,iy,count,expected
  ksweep.csv       k,n_replicates,e_rms,err_of_mean,se_mean
  ksweep_points.csv k,t,mc_mean,rms_dev,limit_value,se_mean
  dtsweep.csv      dt_diff,n_replicates,mean_extinction,se
"""

from __future__ import annotations

import csv
from pathlib import Path


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_rows(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def pack_positions(points) -> str:
    return "|".join(" ".join(f"{c:.17g}" for c in pt) for pt in points)


def read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]
