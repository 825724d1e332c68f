//! Upper convex hulls ("hoods") by Wagener's parallel divide-and-conquer
//! merge, run on a simulated barrier-synchronous thread-block machine.
//!
//! The pieces:
//!
//! * [`geom`]: points, the `REMOTE` padding sentinel, the orientation test.
//! * [`hoodbuf`]: input validation and the padded block layout of hoods.
//! * [`psim`]: the phase engine with write/read auditing and step counts.
//! * [`kernel`]: the tangent classifiers and the merge phase program.
//! * [`driver`]: the round loop from pairs of points up to the full hood.
//! * [`oracle`]: brute-force and serial reference answers.
//! * [`cli`]: file grammars, traces, SVG output and the `hull` commands.
//!
//! ```
//! use wagener_hull::{build_hood, validate_points, Point2};
//!
//! let pts = vec![
//!     Point2::new(0.1, 0.5),
//!     Point2::new(0.2, 0.6),
//!     Point2::new(0.6, 0.9),
//!     Point2::new(0.7, 0.2),
//! ];
//! let ps = validate_points(pts.clone()).unwrap();
//! assert_eq!(build_hood(&ps, None).unwrap(), pts);
//! ```

pub mod cli;
pub mod driver;
pub mod geom;
pub mod hoodbuf;
pub mod instances;
pub mod kernel;
pub mod oracle;
pub mod psim;

pub use driver::{build_hood, round_metrics, run_rounds, BuildOptions, DriverError, HoodRun};
pub use geom::{is_remote, left_of, make_remote, Point2, REMOTE};
pub use hoodbuf::{init_hood, validate_hood, validate_points, HoodBuffer, PointError, PointSet};
pub use kernel::{classify_f, classify_g, Classification};
pub use oracle::{brute_common_tangent, brute_tangent_to_right, oracle_upper_hull};
pub use psim::{BlockDims, ConflictReport, EvalOrder, StepMetrics};
