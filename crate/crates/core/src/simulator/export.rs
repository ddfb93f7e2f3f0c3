use std::io::{self, Write};

use super::Trajectory;
use crate::numfmt::sig12;

/// Leading bytes of the binary trajectory format.
///
/// Layout (little-endian): magic, `u64` frame count, `u64` node count, node
/// abscissae, then per frame `t`, the `m` field and the `a` field, all `f64`.
pub const BINARY_MAGIC: &[u8; 8] = b"MBTRAJ01";

/// Space-time table with columns `t,x,m,a`.
pub fn write_csv<S, W: Write>(traj: &Trajectory<S>, mut w: W) -> io::Result<()> {
    writeln!(w, "t,x,m,a")?;
    for (k, &t) in traj.times.iter().enumerate() {
        let ts = sig12(t);
        for i in 0..traj.grid.points() {
            writeln!(
                w,
                "{},{},{},{}",
                ts,
                sig12(traj.grid.x(i)),
                sig12(traj.fields_m[k][i]),
                sig12(traj.fields_a[k][i])
            )?;
        }
    }
    w.flush()
}

pub fn write_binary<S, W: Write>(traj: &Trajectory<S>, mut w: W) -> io::Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(traj.times.len() as u64).to_le_bytes())?;
    w.write_all(&(traj.grid.points() as u64).to_le_bytes())?;
    for i in 0..traj.grid.points() {
        w.write_all(&traj.grid.x(i).to_le_bytes())?;
    }
    for (k, &t) in traj.times.iter().enumerate() {
        w.write_all(&t.to_le_bytes())?;
        for v in traj.fields_m[k].iter().chain(&traj.fields_a[k]) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

/// `t x m a` blocks separated by blank lines, as read by gnuplot `splot ... with pm3d`.
pub fn write_heatmap<S, W: Write>(traj: &Trajectory<S>, mut w: W) -> io::Result<()> {
    writeln!(w, "# t x m a")?;
    for (k, &t) in traj.times.iter().enumerate() {
        for i in 0..traj.grid.points() {
            writeln!(
                w,
                "{} {} {} {}",
                sig12(t),
                sig12(traj.grid.x(i)),
                sig12(traj.fields_m[k][i]),
                sig12(traj.fields_a[k][i])
            )?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Monitored spatial statistics, one row per monitor sample.
pub fn write_timeseries<S, W: Write>(traj: &Trajectory<S>, mut w: W) -> io::Result<()> {
    let m = &traj.monitor;
    writeln!(w, "t,mean_m,mean_a,min_m,max_m,min_a,max_a,inhomogeneity")?;
    for k in 0..m.times.len() {
        let row = [
            m.times[k],
            m.mean_m[k],
            m.mean_a[k],
            m.min_m[k],
            m.max_m[k],
            m.min_a[k],
            m.max_a[k],
            m.inhomogeneity[k],
        ];
        let cells: Vec<String> = row.iter().map(|v| sig12(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

/// Gnuplot script rendering the heatmap of `m` and the mean time series.
pub fn write_plot_script<W: Write>(mut w: W, heatmap: &str, timeseries: &str) -> io::Result<()> {
    write!(
        w,
        "set terminal pngcairo size 1200,500\n\
         set output 'heatmap_m.png'\n\
         set view map\n\
         set xlabel 't'\n\
         set ylabel 'x'\n\
         set cblabel 'm'\n\
         splot '{heatmap}' using 1:2:3 with pm3d notitle\n\
         set output 'timeseries.png'\n\
         unset view\n\
         set datafile separator ','\n\
         set ylabel 'spatial mean'\n\
         plot '{timeseries}' using 1:2 with lines title 'm', \\\n     \
         '{timeseries}' using 1:3 with lines title 'a'\n"
    )?;
    w.flush()
}
