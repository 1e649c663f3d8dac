//! Jacobian rank tests, the coplanar-axes criterion and grid scans of the
//! singular set.

use super::maps::{FrameChain, KinematicMap};
use super::KinematicsError;
use crate::grid::GridShape;
use crate::kinematics::chart::GridAxis;
use crate::linalg::{numerical_rank, singular_values};
use crate::report::{csv_row, fmt17};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Default relative rank threshold for algebraic tests.
pub const ALGEBRA_TOL: f64 = 1e-8;
/// Default relative rank threshold for grid scans.
pub const SCAN_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularTest {
    pub is_singular: bool,
    pub rank: usize,
    /// The `r`-th singular value, `r = min(dim C, dim W)`; zero when the
    /// Jacobian has fewer than `r` singular values.
    pub smallest: f64,
    pub largest: f64,
}

/// Rank test on a precomputed Jacobian with expected full rank `full`.
pub fn rank_test(j: &DMatrix<f64>, full: usize, tol: f64) -> SingularTest {
    let sv = singular_values(j);
    let rank = numerical_rank(&sv, tol);
    let smallest = if full == 0 { 0.0 } else { sv.get(full - 1).copied().unwrap_or(0.0) };
    SingularTest { is_singular: rank < full, rank, smallest, largest: sv.first().copied().unwrap_or(0.0) }
}

/// Singular iff the numerical rank of the Jacobian at `c` is below
/// `min(dim C, dim W)`.
pub fn singular_test(k: &KinematicMap, c: &[f64], tol: f64) -> Result<SingularTest, KinematicsError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(KinematicsError::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    k.check_config(c)?;
    let full = k.config_chart().dim().min(k.work_chart().dim());
    Ok(rank_test(&k.jacobian(c), full, tol))
}

fn axis_matrix(chain: &FrameChain) -> Result<DMatrix<f64>, KinematicsError> {
    let axes = chain.revolute_axes();
    if axes.len() < 3 {
        return Err(KinematicsError::TestVacuous(axes.len()));
    }
    Ok(DMatrix::from_fn(3, axes.len(), |r, c| axes[c][r]))
}

/// True iff all revolute axes on the end-effector path are parallel to a
/// common plane (direction matrix of rank at most 2).
pub fn coplanarity_test(chain: &FrameChain, tol: f64) -> Result<bool, KinematicsError> {
    let m = axis_matrix(chain)?;
    Ok(numerical_rank(&singular_values(&m), tol) <= 2)
}

/// The coplanarity predicate next to the positional and orientational
/// rank tests of the same chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoplanarityCrossCheck {
    pub coplanar: bool,
    pub orientation_rank: usize,
    pub position_rank: usize,
    pub agrees_with_orientation: bool,
    pub agrees_with_position: bool,
}

pub fn coplanarity_cross_check(chain: &FrameChain, tol: f64) -> Result<CoplanarityCrossCheck, KinematicsError> {
    let coplanar = coplanarity_test(chain, tol)?;
    let j = chain.spatial_jacobian();
    let orientation_rank = numerical_rank(&singular_values(&j.rows(3, 3).into_owned()), tol);
    let position_rank = numerical_rank(&singular_values(&j.rows(0, 3).into_owned()), tol);
    Ok(CoplanarityCrossCheck {
        coplanar,
        orientation_rank,
        position_rank,
        agrees_with_orientation: coplanar == (orientation_rank < 3),
        agrees_with_position: coplanar == (position_rank < 3),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub index: Vec<usize>,
    pub center: Vec<f64>,
    pub sigma_min: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanComponent {
    /// Linear indices of the member cells.
    pub cells: Vec<usize>,
    /// `log2(flagged children at 2N / cells at N)`; `None` when the
    /// refinement was skipped.
    pub dimension: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularScanReport {
    pub shape: Vec<usize>,
    pub tol: f64,
    pub cells: Vec<ScanCell>,
    pub singular_cells: Vec<usize>,
    pub singular_fraction: f64,
    pub components: Vec<ScanComponent>,
}

impl SingularScanReport {
    pub fn to_csv(&self) -> String {
        let d = self.shape.len();
        let mut header: Vec<String> = (0..d).map(|i| format!("i{i}")).collect();
        header.extend((0..d).map(|i| format!("c{i}")));
        header.extend(["sigma_min".to_string(), "is_singular".to_string()]);
        let mut out = csv_row(&header);
        for cell in &self.cells {
            let mut row: Vec<String> = cell.index.iter().map(|i| i.to_string()).collect();
            row.extend(cell.center.iter().map(|&c| fmt17(c)));
            row.push(fmt17(cell.sigma_min));
            row.push(if cell.singular { "1" } else { "0" }.into());
            out.push_str(&csv_row(&row));
        }
        out
    }
}

fn scan_flags(k: &KinematicMap, n: usize, tol: f64) -> (GridShape, Vec<(Vec<f64>, SingularTest)>) {
    let centers = k.config_chart().cell_centers(n);
    let axes: Vec<GridAxis> = centers
        .iter()
        .enumerate()
        .map(|(i, v)| GridAxis { values: v.clone(), cyclic: k.config_chart().is_circle(i) })
        .collect();
    let shape = GridShape::from_axes(&axes);
    let full = k.config_chart().dim().min(k.work_chart().dim());
    let results = (0..shape.len())
        .into_par_iter()
        .map(|lin| {
            let c: Vec<f64> = shape.unravel(lin).iter().enumerate().map(|(a, &i)| centers[a][i]).collect();
            let t = rank_test(&k.jacobian(&c), full, tol);
            (c, t)
        })
        .collect();
    (shape, results)
}

fn components(shape: &GridShape, flags: &[bool]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..flags.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for lin in (0..flags.len()).filter(|&i| flags[i]) {
        for nb in shape.forward_neighbors(lin) {
            if flags[nb] {
                let (a, b) = (find(&mut parent, lin), find(&mut parent, nb));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for lin in (0..flags.len()).filter(|&i| flags[i]) {
        let r = find(&mut parent, lin);
        groups.entry(r).or_default().push(lin);
    }
    groups.into_values().collect()
}

/// Flags cells whose centre fails [`singular_test`] at relative threshold
/// `tol`, groups them into components, and estimates each component's
/// box-counting dimension from a second scan at `2n`.
pub fn singular_scan(k: &KinematicMap, n: usize, tol: f64) -> Result<SingularScanReport, KinematicsError> {
    singular_scan_with(k, n, tol, true)
}

pub fn singular_scan_with(
    k: &KinematicMap,
    n: usize,
    tol: f64,
    estimate_dimension: bool,
) -> Result<SingularScanReport, KinematicsError> {
    let dim = k.config_chart().dim();
    if dim > 4 {
        return Err(KinematicsError::ScanInfeasible(dim));
    }
    if n == 0 || tol.is_nan() || tol <= 0.0 {
        return Err(KinematicsError::InvalidParams(format!("need grid > 0 and tol > 0, got {n}, {tol}")));
    }
    let (shape, results) = scan_flags(k, n, tol);
    let flags: Vec<bool> = results.iter().map(|(_, t)| t.is_singular).collect();
    let singular_cells: Vec<usize> = (0..flags.len()).filter(|&i| flags[i]).collect();
    let groups = components(&shape, &flags);

    let fine = if estimate_dimension && !singular_cells.is_empty() { Some(scan_flags(k, 2 * n, tol)) } else { None };
    let mut component_of = vec![usize::MAX; flags.len()];
    for (g, cells) in groups.iter().enumerate() {
        cells.iter().for_each(|&c| component_of[c] = g);
    }
    let mut child_counts = vec![0usize; groups.len()];
    if let Some((fshape, fres)) = &fine {
        for (lin, (_, t)) in fres.iter().enumerate() {
            if t.is_singular {
                let coarse: Vec<usize> = fshape.unravel(lin).iter().map(|i| i / 2).collect();
                let g = component_of[shape.ravel(&coarse)];
                if g != usize::MAX {
                    child_counts[g] += 1;
                }
            }
        }
    }
    let components = groups
        .into_iter()
        .enumerate()
        .map(|(g, cells)| {
            let dimension = fine.as_ref().map(|_| {
                if child_counts[g] == 0 {
                    0.0
                } else {
                    (child_counts[g] as f64 / cells.len() as f64).log2()
                }
            });
            ScanComponent { cells, dimension }
        })
        .collect();

    let cells: Vec<ScanCell> = results
        .into_iter()
        .enumerate()
        .map(|(lin, (center, t))| ScanCell { index: shape.unravel(lin), center, sigma_min: t.smallest, singular: t.is_singular })
        .collect();
    Ok(SingularScanReport {
        shape: shape.dims.clone(),
        tol,
        singular_fraction: singular_cells.len() as f64 / cells.len() as f64,
        cells,
        singular_cells,
        components,
    })
}

/// Area (or volume) factor `sqrt(det(JᵀJ))` of a Jacobian with full column rank.
pub fn volume_factor(j: &DMatrix<f64>) -> f64 {
    (j.transpose() * j).determinant().max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::maps::{canonical_map, fixture_4r, planar_chain, ChainOutput};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn planar_rr_singular_at_folded_and_extended() {
        let k = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
        assert!(singular_test(&k, &[0.3, 0.0], ALGEBRA_TOL).unwrap().is_singular);
        let t = singular_test(&k, &[0.3, FRAC_PI_2], ALGEBRA_TOL).unwrap();
        assert!(!t.is_singular);
        assert_eq!(t.rank, 2);
    }

    #[test]
    fn pointing_pole_rank_one() {
        let k = canonical_map("pointing", &[]).unwrap();
        let t = singular_test(&k, &[FRAC_PI_2, 0.4], ALGEBRA_TOL).unwrap();
        assert!(t.is_singular);
        assert_eq!(t.rank, 1);
        assert!(!singular_test(&k, &[0.0, 0.0], ALGEBRA_TOL).unwrap().is_singular);
    }

    #[test]
    fn pointing_area_factor_is_cos_alpha() {
        let k = canonical_map("pointing", &[]).unwrap();
        for i in 0..50 {
            let a = -PI + 2.0 * PI * i as f64 / 50.0;
            assert!((volume_factor(&k.jacobian(&[a, 1.0])) - a.cos().abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn coplanarity_on_planar_chain() {
        let k = KinematicMap::from_mechanism(&planar_chain(&[1.0, 1.0, 1.0]), 3, ChainOutput::Pose).unwrap();
        let ch = k.frame_chain(&[0.1, 0.2, 0.3]).unwrap();
        assert!(coplanarity_test(&ch, ALGEBRA_TOL).unwrap());
        let two = KinematicMap::from_mechanism(&planar_chain(&[1.0, 1.0]), 2, ChainOutput::Pose).unwrap();
        let ch2 = two.frame_chain(&[0.1, 0.2]).unwrap();
        assert_eq!(coplanarity_test(&ch2, ALGEBRA_TOL), Err(KinematicsError::TestVacuous(2)));
    }

    #[test]
    fn generic_4r_not_coplanar() {
        let k = KinematicMap::from_mechanism(&fixture_4r(), 4, ChainOutput::Pose).unwrap();
        let ch = k.frame_chain(&[0.3, 1.0, 1.2, 0.5]).unwrap();
        assert!(!coplanarity_test(&ch, ALGEBRA_TOL).unwrap());
    }

    #[test]
    fn scan_identity_circle_is_empty() {
        let k = canonical_map("identity_circle", &[]).unwrap();
        let r = singular_scan(&k, 64, SCAN_TOL).unwrap();
        assert!(r.singular_cells.is_empty());
        assert_eq!(r.singular_fraction, 0.0);
    }

    #[test]
    fn scan_pointing_finds_two_bands() {
        let k = canonical_map("pointing", &[]).unwrap();
        let r = singular_scan(&k, 90, 0.05).unwrap();
        assert_eq!(r.components.len(), 2);
        for cell in &r.cells {
            assert_eq!(cell.singular, cell.center[0].cos().abs() <= 0.05);
        }
        for comp in &r.components {
            let d = comp.dimension.unwrap();
            assert!((0.5..=2.5).contains(&d), "{d}");
        }
        assert!(r.singular_fraction > 0.0 && r.singular_fraction < 1.0);
    }

    #[test]
    fn scan_planar_rr_bands_at_beta_zero_and_pi() {
        let k = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
        // odd grid: a cell centre sits exactly on beta = pi
        let r = singular_scan_with(&k, 61, 0.05, false).unwrap();
        for &lin in &r.singular_cells {
            let b = r.cells[lin].center[1];
            assert!(b.sin().abs() < 0.3);
        }
        assert_eq!(r.components.len(), 2);
    }

    #[test]
    fn scan_rejects_high_dimension() {
        let rows = planar_chain(&[1.0; 5]);
        let k = KinematicMap::from_mechanism(&rows, 5, ChainOutput::PlanarPosition).unwrap();
        assert_eq!(singular_scan(&k, 4, SCAN_TOL).unwrap_err(), KinematicsError::ScanInfeasible(5));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let k = canonical_map("identity_circle", &[]).unwrap();
        let csv = singular_scan(&k, 4, SCAN_TOL).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i0,c0,sigma_min,is_singular");
        assert_eq!(lines.len(), 5);
    }

    proptest! {
        #[test]
        fn coplanarity_matches_orientation_rank(q in prop::collection::vec(-PI..PI, 4)) {
            let k = KinematicMap::from_mechanism(&fixture_4r(), 4, ChainOutput::Pose).unwrap();
            let ch = k.frame_chain(&q).unwrap();
            let x = coplanarity_cross_check(&ch, ALGEBRA_TOL).unwrap();
            prop_assert!(x.agrees_with_orientation);
        }
    }
}
