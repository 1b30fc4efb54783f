//! Benchmark problems as [`OdeSystem`] constructors, and cached reference
//! solutions for the PDE problems.
//!
//! Three problems are provided:
//!
//! - [`harmonic_oscillator`]: the 2D harmonic oscillator, four first-order
//!   equations with a known sinusoidal solution - the convergence-order
//!   workhorse.
//! - [`advection_source`]: `u_t + u_x = u - u^2` on `[0, 10]`, first-order
//!   upwind in space, zero inflow at the left boundary. The initial
//!   condition is a constant-amplitude pulse on `2 < x < 4`. The amplitude
//!   and pulse placement are configuration choices, not canonical ones;
//!   results depend on them and the CLI exposes the amplitude as a flag.
//! - [`adr2d`]: `u_t = eps lap(u) - alpha (u_x + u_y) + gamma u(u-1/2)(1-u)`
//!   on the unit square with homogeneous Neumann boundaries (mirror ghost
//!   nodes), second-order central differences.
//!
//! The PDE problems have no closed-form solution; errors are measured
//! against a cached time-accurate reference computed by `OTDDIRK5s3` with a
//! step 100x smaller than the finest step under study (see
//! [`compute_reference`]). Reference files are flat little-endian `f64`
//! arrays behind a small text header.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::plot::write_atomic;
use crate::stepper::{integrate, IntegrationConfig, OdeSystem};
use crate::tableau::get_scheme;

/// Uniform 1D grid: points `x_i = x_left + i dx`, `i = 0 .. n_cells-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n_cells: usize,
    pub dx: f64,
    pub x_left: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, dx: f64, x_left: f64) -> Result<Self> {
        if n_cells < 3 {
            return Err(Error::InvalidConfig(format!(
                "1D grid needs at least 3 points, got {n_cells}"
            )));
        }
        if !(dx > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid spacing must be positive, got {dx}"
            )));
        }
        Ok(Grid1D {
            n_cells,
            dx,
            x_left,
        })
    }

    /// Advection benchmark grid for resolution parameter `n`: spacing
    /// `dx = 2/n` on the domain `[0, 10]` (so `n = 50, 100, 200` give
    /// `dx = 0.04, 0.02, 0.01` and CFL `= h/dx = 0.5, 1, 2` at `h = 0.02`).
    pub fn advection_benchmark(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be positive".to_string()));
        }
        let dx = 2.0 / n as f64;
        let points = (10.0 / dx).round() as usize + 1;
        Grid1D::new(points, dx, 0.0)
    }
}

/// Uniform square 2D grid (`nx = ny`, `dx = dy`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx != ny || dx != dy {
            return Err(Error::InvalidConfig(format!(
                "2D grid must be square (nx = ny, dx = dy), got {nx}x{ny}, dx = {dx}, dy = {dy}"
            )));
        }
        if nx < 3 {
            return Err(Error::InvalidConfig(format!(
                "2D grid needs at least 3 points per direction, got {nx}"
            )));
        }
        if !(dx > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid spacing must be positive, got {dx}"
            )));
        }
        Ok(Grid2D { nx, ny, dx, dy })
    }

    /// Unit-square grid with the given number of points per direction
    /// (spacing `1/(points-1)`): 101 points is the benchmark resolution,
    /// 21 points the coarse variant.
    pub fn unit_square(points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 points per direction, got {points}"
            )));
        }
        let dx = 1.0 / (points - 1) as f64;
        Grid2D::new(points, points, dx, dx)
    }
}

/// A named system bundled with its initial state.
pub struct BenchmarkProblem {
    pub name: String,
    pub system: OdeSystem,
    pub y0: Vec<f64>,
}

/// The 2D harmonic oscillator in `(p1, q1, p2, q2)` form:
/// `f = (-q1, p1, -q2, p2)`, `g = f'(y) f(y) = (-p1, -q1, -p2, -q2)`,
/// initial state `(0, 1, 1, 0)`, exact solution
/// `(-sin t, cos t, cos t, sin t)`.
pub fn harmonic_oscillator() -> BenchmarkProblem {
    let system = OdeSystem::new(
        4,
        |y, out| {
            out[0] = -y[1];
            out[1] = y[0];
            out[2] = -y[3];
            out[3] = y[2];
        },
        |y, out| {
            out[0] = -y[0];
            out[1] = -y[1];
            out[2] = -y[2];
            out[3] = -y[3];
        },
    )
    .with_exact(|t, out| {
        out[0] = -t.sin();
        out[1] = t.cos();
        out[2] = t.cos();
        out[3] = t.sin();
    });
    BenchmarkProblem {
        name: "harmonic".to_string(),
        system,
        y0: vec![0.0, 1.0, 1.0, 0.0],
    }
}

fn advection_problem(grid: Grid1D, amplitude: f64, with_source: bool) -> Result<BenchmarkProblem> {
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "amplitude must lie in (0, 1], got {amplitude}"
        )));
    }
    let n = grid.n_cells;
    let inv_dx = 1.0 / grid.dx;

    let f = move |u: &[f64], out: &mut [f64]| {
        out[0] = 0.0; // inflow value is held fixed
        for i in 1..n {
            let transport = -(u[i] - u[i - 1]) * inv_dx;
            let source = if with_source { u[i] - u[i] * u[i] } else { 0.0 };
            out[i] = transport + source;
        }
    };
    // g = J f with J bidiagonal: dF_i/du_i = -1/dx + (1 - 2 u_i),
    // dF_i/du_{i-1} = 1/dx; row 0 is identically zero.
    let g = move |u: &[f64], out: &mut [f64]| {
        let mut fu = vec![0.0; n];
        fu[0] = 0.0;
        for i in 1..n {
            let source = if with_source { u[i] - u[i] * u[i] } else { 0.0 };
            fu[i] = -(u[i] - u[i - 1]) * inv_dx + source;
        }
        out[0] = 0.0;
        for i in 1..n {
            let diag = if with_source {
                -inv_dx + 1.0 - 2.0 * u[i]
            } else {
                -inv_dx
            };
            out[i] = diag * fu[i] + inv_dx * fu[i - 1];
        }
    };

    let mut y0 = vec![0.0; n];
    for (i, v) in y0.iter_mut().enumerate() {
        let x = grid.x_left + i as f64 * grid.dx;
        if x > 2.0 && x < 4.0 {
            *v = amplitude;
        }
    }

    Ok(BenchmarkProblem {
        name: if with_source {
            "advection".to_string()
        } else {
            "advection-transport".to_string()
        },
        system: OdeSystem::new(n, f, g),
        y0,
    })
}

/// Upwind-discretized `u_t + u_x = u - u^2` with zero inflow on the left
/// and free outflow on the right, pulse initial condition of the given
/// amplitude on `2 < x < 4`.
pub fn advection_source(grid: Grid1D, amplitude: f64) -> Result<BenchmarkProblem> {
    advection_problem(grid, amplitude, true)
}

/// Pure upwind transport (source disabled) with the same boundary and
/// initial conditions; useful for conservation studies.
pub fn advection_transport_only(grid: Grid1D, amplitude: f64) -> Result<BenchmarkProblem> {
    advection_problem(grid, amplitude, false)
}

/// 2D advection-diffusion-reaction problem on the unit square:
/// `u_t = eps lap(u) - alpha (u_x + u_y) + gamma u (u - 1/2)(1 - u)` with
/// homogeneous Neumann boundaries and initial condition
/// `u = 0.3 + 256 (x(1-x) y(1-y))^2`. Benchmark parameters:
/// `eps = 1/100`, `alpha = -10`, `gamma = 100`.
pub fn adr2d(grid: Grid2D, eps: f64, alpha: f64, gamma: f64) -> Result<BenchmarkProblem> {
    let nx = grid.nx;
    let ny = grid.ny;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_2dx = 1.0 / (2.0 * grid.dx);

    // Mirror ghost values u_{-1} = u_1: the Laplacian doubles the inward
    // difference at the wall and the centered first derivative vanishes in
    // the normal direction.
    let linear_part = move |u: &[f64], out: &mut [f64]| {
        for iy in 0..ny {
            for ix in 0..nx {
                let k = iy * nx + ix;
                let west = if ix == 0 { u[k + 1] } else { u[k - 1] };
                let east = if ix == nx - 1 { u[k - 1] } else { u[k + 1] };
                let south = if iy == 0 { u[k + nx] } else { u[k - nx] };
                let north = if iy == ny - 1 { u[k - nx] } else { u[k + nx] };
                let lap = (east - 2.0 * u[k] + west + north - 2.0 * u[k] + south) * inv_dx2;
                let adv = (east - west) * inv_2dx + (north - south) * inv_2dx;
                out[k] = eps * lap - alpha * adv;
            }
        }
    };

    let f = move |u: &[f64], out: &mut [f64]| {
        linear_part(u, out);
        for (o, &v) in out.iter_mut().zip(u) {
            *o += gamma * (-v * v * v + 1.5 * v * v - 0.5 * v);
        }
    };
    // g = J f: the linear operator applied to f plus the diagonal reaction
    // Jacobian gamma (-3u^2 + 3u - 1/2).
    let g = move |u: &[f64], out: &mut [f64]| {
        let mut fu = vec![0.0; nx * ny];
        linear_part(u, &mut fu);
        for (o, &v) in fu.iter_mut().zip(u) {
            *o += gamma * (-v * v * v + 1.5 * v * v - 0.5 * v);
        }
        linear_part(&fu, out);
        for k in 0..nx * ny {
            out[k] += gamma * (-3.0 * u[k] * u[k] + 3.0 * u[k] - 0.5) * fu[k];
        }
    };

    let mut y0 = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let x = ix as f64 * grid.dx;
            let y = iy as f64 * grid.dy;
            let shape = x * (1.0 - x) * y * (1.0 - y);
            y0[iy * nx + ix] = 0.3 + 256.0 * shape * shape;
        }
    }

    Ok(BenchmarkProblem {
        name: "adr".to_string(),
        system: OdeSystem::new(nx * ny, f, g),
        y0,
    })
}

/// A cached time-accurate solution of a problem at `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub problem: String,
    pub grid: String,
    pub h_ref: f64,
    pub t_end: f64,
    pub y: Vec<f64>,
}

/// Canonical file name for a reference solution.
pub fn reference_file_name(problem: &str, grid: &str, t_end: f64, h_ref: f64) -> String {
    format!("{problem}_{grid}_t{t_end:e}_h{h_ref:e}.ref")
}

/// Integrates the problem to `t_end` with `OTDDIRK5s3` at step `h_ref` and
/// packages the final state as a reference.
pub fn compute_reference(
    problem: &BenchmarkProblem,
    grid_tag: &str,
    t_end: f64,
    h_ref: f64,
) -> Result<ReferenceSolution> {
    let scheme = get_scheme("OTDDIRK5s3").expect("built-in");
    let cfg = IntegrationConfig::new(h_ref, 0.0, t_end);
    let run = integrate(&scheme, &problem.system, &problem.y0, &cfg)?;
    Ok(ReferenceSolution {
        problem: problem.name.clone(),
        grid: grid_tag.to_string(),
        h_ref,
        t_end,
        y: run.y_final,
    })
}

const REFERENCE_MAGIC: &str = "tddirk-reference v1";

/// Serializes a reference solution: five text header lines, then the state
/// as consecutive little-endian doubles.
pub fn write_reference(path: &Path, r: &ReferenceSolution) -> Result<()> {
    let mut bytes = Vec::with_capacity(128 + 8 * r.y.len());
    write!(
        bytes,
        "{REFERENCE_MAGIC}\nproblem {}\ngrid {}\nh_ref {:e}\nt_end {:e}\nn {}\n",
        r.problem,
        r.grid,
        r.h_ref,
        r.t_end,
        r.y.len()
    )
    .expect("in-memory write");
    for v in &r.y {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Reads a reference solution written by [`write_reference`].
pub fn read_reference(path: &Path) -> Result<ReferenceSolution> {
    let malformed = |reason: &str| Error::Malformed {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let mut raw = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(path.display().to_string(), e))?;

    // Header: six newline-terminated text lines.
    let mut offset = 0;
    let mut lines = Vec::new();
    for _ in 0..6 {
        let end = raw[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| malformed("truncated header"))?;
        let line = std::str::from_utf8(&raw[offset..offset + end])
            .map_err(|_| malformed("header is not UTF-8"))?;
        lines.push(line.to_string());
        offset += end + 1;
    }
    if lines[0] != REFERENCE_MAGIC {
        return Err(malformed("missing magic line"));
    }
    let field = |idx: usize, key: &str| -> Result<String> {
        lines[idx]
            .strip_prefix(&format!("{key} "))
            .map(str::to_string)
            .ok_or_else(|| malformed(&format!("expected `{key}` on line {}", idx + 1)))
    };
    let problem = field(1, "problem")?;
    let grid = field(2, "grid")?;
    let h_ref: f64 = field(3, "h_ref")?
        .parse()
        .map_err(|_| malformed("unparsable h_ref"))?;
    let t_end: f64 = field(4, "t_end")?
        .parse()
        .map_err(|_| malformed("unparsable t_end"))?;
    let n: usize = field(5, "n")?
        .parse()
        .map_err(|_| malformed("unparsable n"))?;

    let body = &raw[offset..];
    if body.len() != 8 * n {
        return Err(malformed(&format!(
            "expected {} bytes of payload, found {}",
            8 * n,
            body.len()
        )));
    }
    let y = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(ReferenceSolution {
        problem,
        grid,
        h_ref,
        t_end,
        y,
    })
}
