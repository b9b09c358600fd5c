use std::io::Write;
use std::path::Path;

use crate::error::Result;

const TEMPLATE: &str = r#"import sys

import matplotlib.pyplot as plt
import pandas as pd

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
df = pd.read_csv(path)
df = df[~df["status"].str.startswith("error")]
metric = "direction_error"
fig, ax = plt.subplots()
for (method, delta, n, s), g in df.groupby(["method", "delta", "N", "s"], dropna=False):
    med = g.groupby("m_expected")[metric].median()
    label = f"{method} N={n} s={s}" + ("" if pd.isna(delta) else f" delta={delta}")
    ax.plot(med.index, med.values, marker="o", label=label)
ax.set_xlabel("m")
ax.set_ylabel("median " + metric)
ax.set_yscale("log")
ax.legend()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"#;

/// Writes a matplotlib script plotting median error against `m` for `csv`.
pub fn write_plot_script<W: Write>(csv: &Path, mut w: W) -> Result<()> {
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    w.write_all(TEMPLATE.replace("{csv}", &name).as_bytes())?;
    w.flush()?;
    Ok(())
}
