//! Closed-form line physics and numerical spectrum analysis.

pub mod analytic;
pub mod convolve;
pub mod fit;
pub mod peaks;
pub mod sweep;

pub use analytic::{analytic_linewidths, dressed_eigenvalues, LinewidthPair};
pub use convolve::convolve_laser_linewidth;
pub use fit::fit_lorentzian;
pub use peaks::{find_peaks, Peak};
pub use sweep::{sweep_linewidth, SweepOptions, SweepRow};
