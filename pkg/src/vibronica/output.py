"""Result envelopes: CSV/JSON writers with provenance, and plot-script emission."""
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

import vibronica
from vibronica import kernels


def fmt(x):
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


@dataclass
class Envelope:
    name: str
    columns: list
    rows: np.ndarray
    provenance: dict = field(default_factory=dict)
    text_columns: dict = field(default_factory=dict)

    def provenance_lines(self):
        return [f"{k}: {v}" for k, v in self.provenance.items()]


def provenance(command, cfg, truncations, wall_time):
    return {
        "command": command,
        "config_sha256": cfg.digest(),
        "versions": (f"vibronica {vibronica.__version__} ({kernels.BACKEND} kernels); "
                     f"numpy {np.__version__}; scipy {scipy.__version__}; "
                     f"python {platform.python_version()}"),
        "truncations": json.dumps(truncations, sort_keys=True),
        "config": cfg.canonical_json(),
        "wall_time_s": f"{wall_time:.3f}",
    }


def write_csv(env, path):
    lines = ["# " + s for s in env.provenance_lines()]
    lines.append(",".join(env.columns))
    rows = np.atleast_2d(env.rows)
    for i, row in enumerate(rows):
        cells = []
        for j, col in enumerate(env.columns):
            if col in env.text_columns:
                cells.append(env.text_columns[col][i])
            else:
                cells.append(fmt(row[j]))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")
    return Path(path)


def write_json(env, path):
    rows = []
    for i, row in enumerate(np.atleast_2d(env.rows)):
        rows.append([env.text_columns[c][i] if c in env.text_columns else float(row[j])
                     for j, c in enumerate(env.columns)])
    doc = {"provenance": env.provenance, "columns": env.columns, "rows": rows}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", newline="\n")
    return Path(path)


def read_csv(path):
    """(provenance dict, columns, rows as float array; text cells become nan)."""
    prov = {}
    body = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            prov[k] = v
        else:
            body.append(line.split(","))
    cols = body[0]

    def num(s):
        try:
            return float(s)
        except ValueError:
            return np.nan
    return prov, cols, np.array([[num(s) for s in r] for r in body[1:]])


_HEADER = '''"""Plot {title}. Generated by vibronica; reads only the data file(s) below."""
import numpy as np
import matplotlib.pyplot as plt


def load(path):
    with open(path) as fh:
        lines = [l for l in fh if not l.startswith("#")]
    cols = lines[0].strip().split(",")
    conv = {{i: (lambda s: float(s) if s not in ("analytic", "numeric") else
               float(s == "numeric")) for i in range(len(cols))}}
    data = np.loadtxt(lines[1:], delimiter=",", converters=conv, ndmin=2)
    return cols, data

'''

_STYLES = {
    "bar": '''
cols, d = load({data!r})
m = d[:, 0]
fig, ax = plt.subplots(1, 2, figsize=(8, 3), sharey=True)
ax[0].bar(m, d[:, 1], color="tab:red", width=0.7)
ax[0].set_title("emission")
ax[1].bar(m, d[:, 2], color="tab:blue", width=0.7)
ax[1].set_title("absorption")
for a in ax:
    a.set_xlabel("m")
ax[0].set_ylabel("Franck-Condon factor")
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
''',
    "overlay": '''
fig, ax = plt.subplots(figsize=(6, 3.5))
for path, color in zip({data!r}, ("tab:red", "tab:blue")):
    cols, d = load(path)
    x, a, n = d[:, 0], d[:, 1], d[:, 2]
    ax.fill_between(x, 0, a / a.max(), color=color, alpha=0.3, lw=0)
    ax.plot(x, n / n.max(), color=color, lw=1)
ax.set_yscale("log")
ax.set_ylim(1e-4, 1.5)
ax.set_xlabel("normalized detuning")
ax.set_ylabel("normalized spectrum")
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
''',
    "line": '''
cols, d = load({data!r})
fig, ax = plt.subplots(figsize=(6, 3.5))
for j in range(1, d.shape[1]):
    if cols[j] in ("abs_diff", "source"):
        continue
    ax.plot(d[:, 0], d[:, j], label=cols[j])
ax.set_xlabel(cols[0])
ax.legend()
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
''',
    "transmission": '''
cols, d = load({data!r})
fig, ax = plt.subplots(figsize=(6, 3.5))
for flag, style, label in ((0.0, "-", "analytic"), (1.0, "o", "numeric")):
    sel = d[:, 4] == flag
    if sel.any():
        ax.plot(d[sel, 0], d[sel, 3], style, ms=3, label=label)
ax.set_xlabel(cols[0])
ax.set_ylabel("|T|^2")
ax.legend()
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
''',
    "heatmap": '''
with open({data!r}) as fh:
    lines = [l for l in fh if not l.startswith("#")]
head = lines[0].strip().split(",")
x = np.array(head[1:], dtype=float)
d = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
n, z = d[:, 0], d[:, 1:]
fig, ax = plt.subplots(figsize=(6, 4))
ax.pcolormesh(x, n, z, shading="auto", cmap="viridis")
for n_line in {profiles!r}:
    i = int(np.argmin(np.abs(n - n_line)))
    if abs(n[i] - n_line) > 0.5:
        continue
    amp = 0.2 * (n.max() - n.min())
    sign = 1.0 if n[i] + amp <= n.max() else -1.0
    ax.plot(x, n[i] + sign * amp * z[i] / z[i].max(), color="white", lw=1)
ax.set_ylim(n.min(), n.max())
ax.set_xlabel("omega_l")
ax.set_ylabel("N")
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
''',
}


def emit_plot_script(data, style, path):
    """Write a standalone matplotlib script that renders ``data`` in ``style``.

    ``data`` is a CSV path (a pair of paths for the overlay style). Paths are
    stored relative to the script so the output directory can be moved.
    """
    path = Path(path)
    if style not in _STYLES:
        raise ValueError(f"unknown plot style {style!r}")
    if style == "overlay":
        rel = [Path(d).name for d in data]
    else:
        rel = Path(data).name
    body = _STYLES[style].format(data=rel, png=path.with_suffix(".png").name,
                                 profiles=[25, 100])
    text = _HEADER.format(title=f"{style} view") + (
        "import os\nos.chdir(os.path.dirname(os.path.abspath(__file__)))\n") + body
    path.write_text(text, newline="\n")
    return path
