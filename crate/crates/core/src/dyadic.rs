//! Dyadic lattices over the domain box, sparse-family construction by
//! Calderon-Zygmund stopping time, and sparsity certification.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::{cube_average, CubeRegion, Domain, GridFunction};

/// Address of a dyadic cube: subdivision depth and per-axis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CubeAddress {
    pub depth: u32,
    pub idx: [usize; 2],
}

impl CubeAddress {
    pub fn label(&self, dim: usize) -> String {
        if dim == 1 {
            format!("{}:{}", self.depth, self.idx[0])
        } else {
            format!("{}:{}:{}", self.depth, self.idx[0], self.idx[1])
        }
    }

    pub fn parse(s: &str, dim: usize) -> Result<CubeAddress> {
        let parts: Vec<&str> = s.split(':').collect();
        let want = 1 + dim;
        if parts.len() != want {
            return Err(Error::invalid(format!(
                "bad cube address {s} for dim {dim}"
            )));
        }
        let depth: u32 = parts[0]
            .parse()
            .map_err(|_| Error::invalid(format!("bad depth in {s}")))?;
        let mut idx = [0usize; 2];
        for (a, p) in parts[1..].iter().enumerate() {
            idx[a] = p
                .parse()
                .map_err(|_| Error::invalid(format!("bad index in {s}")))?;
        }
        Ok(CubeAddress { depth, idx })
    }
}

/// All dyadic subdivisions of the domain box down to single cells.
#[derive(Debug, Clone, Copy)]
pub struct DyadicLattice {
    domain: Domain,
}

impl DyadicLattice {
    pub fn new(domain: Domain) -> Self {
        DyadicLattice { domain }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn root(&self) -> CubeRegion {
        CubeRegion::root(self.domain)
    }

    /// Depth at which cubes are single cells.
    pub fn max_depth(&self) -> u32 {
        self.domain.n_cells().trailing_zeros()
    }

    pub fn cells_per_side_at(&self, depth: u32) -> usize {
        self.domain.n_cells() >> depth
    }

    pub fn cube(&self, addr: CubeAddress) -> Result<CubeRegion> {
        if addr.depth > self.max_depth() {
            return Err(Error::invalid(format!(
                "depth {} exceeds lattice max {}",
                addr.depth,
                self.max_depth()
            )));
        }
        let side = self.cells_per_side_at(addr.depth);
        let per_axis = 1usize << addr.depth;
        for a in 0..self.domain.dim() {
            if addr.idx[a] >= per_axis {
                return Err(Error::invalid(format!(
                    "cube index {} out of range at depth {}",
                    addr.idx[a], addr.depth
                )));
            }
        }
        let offset = [addr.idx[0] * side, addr.idx[1] * side];
        CubeRegion::new(self.domain, offset, side)
    }

    /// Address of a lattice-aligned region.
    pub fn address_of(&self, q: &CubeRegion) -> Result<CubeAddress> {
        let side = q.cells_per_side();
        if !side.is_power_of_two() {
            return Err(Error::invalid("region is not dyadically aligned"));
        }
        let off = q.offset();
        if !off[0].is_multiple_of(side) || (self.domain.dim() == 2 && !off[1].is_multiple_of(side))
        {
            return Err(Error::invalid("region offset is not dyadically aligned"));
        }
        let depth = (self.domain.n_cells() / side).trailing_zeros();
        Ok(CubeAddress {
            depth,
            idx: [
                off[0] / side,
                if self.domain.dim() == 2 {
                    off[1] / side
                } else {
                    0
                },
            ],
        })
    }

    /// The `2^dim` children, or empty at the bottom.
    pub fn children(&self, addr: CubeAddress) -> Vec<CubeAddress> {
        if addr.depth >= self.max_depth() {
            return Vec::new();
        }
        let d = addr.depth + 1;
        let mut out = Vec::with_capacity(1 << self.domain.dim());
        match self.domain.dim() {
            1 => {
                for dx in 0..2 {
                    out.push(CubeAddress {
                        depth: d,
                        idx: [2 * addr.idx[0] + dx, 0],
                    });
                }
            }
            _ => {
                for dy in 0..2 {
                    for dx in 0..2 {
                        out.push(CubeAddress {
                            depth: d,
                            idx: [2 * addr.idx[0] + dx, 2 * addr.idx[1] + dy],
                        });
                    }
                }
            }
        }
        out
    }

    pub fn parent(&self, addr: CubeAddress) -> Option<CubeAddress> {
        if addr.depth == 0 {
            return None;
        }
        Some(CubeAddress {
            depth: addr.depth - 1,
            idx: [addr.idx[0] / 2, addr.idx[1] / 2],
        })
    }

    /// Smallest dyadic cube of the lattice containing a cell, at the given
    /// depth.
    pub fn ancestor_of_cell(&self, flat: usize, depth: u32) -> CubeAddress {
        let side = self.cells_per_side_at(depth);
        let c = self.domain.cell_coords(flat);
        CubeAddress {
            depth,
            idx: [
                c[0] / side,
                if self.domain.dim() == 2 {
                    c[1] / side
                } else {
                    0
                },
            ],
        }
    }
}

/// All dyadic cubes with at least `min_cells_per_side` cells per side
/// (root included), ordered by depth then index.
pub fn enumerate_cubes(lat: &DyadicLattice, min_cells_per_side: usize) -> Result<Vec<CubeRegion>> {
    if min_cells_per_side == 0 || !min_cells_per_side.is_power_of_two() {
        return Err(Error::invalid(
            "min_cells_per_side must be a positive power of two",
        ));
    }
    if min_cells_per_side > lat.domain().n_cells() {
        return Err(Error::invalid("min_cells_per_side exceeds the grid"));
    }
    let deepest = (lat.domain().n_cells() / min_cells_per_side).trailing_zeros();
    let mut out = Vec::new();
    for depth in 0..=deepest {
        let per_axis = 1usize << depth;
        if lat.domain().dim() == 1 {
            for i in 0..per_axis {
                out.push(lat.cube(CubeAddress { depth, idx: [i, 0] })?);
            }
        } else {
            for j in 0..per_axis {
                for i in 0..per_axis {
                    out.push(lat.cube(CubeAddress { depth, idx: [i, j] })?);
                }
            }
        }
    }
    Ok(out)
}

/// A family of dyadic cubes with an explicit disjoint-subset certificate.
#[derive(Debug, Clone)]
pub struct SparseFamily {
    domain: Domain,
    cubes: Vec<CubeAddress>,
    certificate: BTreeMap<CubeAddress, Vec<usize>>,
    eta: f64,
}

impl SparseFamily {
    pub fn new(
        domain: Domain,
        cubes: Vec<CubeAddress>,
        certificate: BTreeMap<CubeAddress, Vec<usize>>,
        eta: f64,
    ) -> Result<Self> {
        if cubes.is_empty() {
            return Err(Error::invalid("sparse family must contain a cube"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1], got {eta}")));
        }
        let mut cubes = cubes;
        cubes.sort();
        cubes.dedup();
        Ok(SparseFamily {
            domain,
            cubes,
            certificate,
            eta,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn addresses(&self) -> &[CubeAddress] {
        &self.cubes
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn certificate(&self) -> &BTreeMap<CubeAddress, Vec<usize>> {
        &self.certificate
    }

    pub fn regions(&self) -> Result<Vec<CubeRegion>> {
        let lat = DyadicLattice::new(self.domain);
        self.cubes.iter().map(|&a| lat.cube(a)).collect()
    }

    /// Line-based text dump: header, then `Q <address>` / `E <cells...>`
    /// blocks.
    pub fn write_text(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "sparse-family v1")?;
        writeln!(w, "dim {}", self.domain.dim())?;
        writeln!(w, "n_cells {}", self.domain.n_cells())?;
        writeln!(w, "half_width {:.17e}", self.domain.half_width())?;
        writeln!(w, "eta {:.17e}", self.eta)?;
        for addr in &self.cubes {
            writeln!(w, "Q {}", addr.label(self.domain.dim()))?;
            let cells = self.certificate.get(addr).cloned().unwrap_or_default();
            let strs: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
            writeln!(w, "E {}", strs.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text(r: &mut impl BufRead) -> Result<SparseFamily> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty sparse family file"))??;
        if header.trim() != "sparse-family v1" {
            return Err(Error::invalid(format!("bad header: {header}")));
        }
        let mut dim = 0usize;
        let mut n_cells = 0usize;
        let mut half_width = 0.0f64;
        let mut eta = 0.0f64;
        let mut cubes = Vec::new();
        let mut cert = BTreeMap::new();
        let mut current: Option<CubeAddress> = None;
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "dim" => {
                    dim = rest.parse().map_err(|_| Error::Config {
                        line: lineno + 2,
                        msg: "bad dim".into(),
                    })?
                }
                "n_cells" => {
                    n_cells = rest.parse().map_err(|_| Error::Config {
                        line: lineno + 2,
                        msg: "bad n_cells".into(),
                    })?
                }
                "half_width" => {
                    half_width = rest.parse().map_err(|_| Error::Config {
                        line: lineno + 2,
                        msg: "bad half_width".into(),
                    })?
                }
                "eta" => {
                    eta = rest.parse().map_err(|_| Error::Config {
                        line: lineno + 2,
                        msg: "bad eta".into(),
                    })?
                }
                "Q" => {
                    let addr = CubeAddress::parse(rest, dim)?;
                    cubes.push(addr);
                    current = Some(addr);
                }
                "E" => {
                    let addr = current.ok_or(Error::Config {
                        line: lineno + 2,
                        msg: "certificate block before any cube".into(),
                    })?;
                    let cells: Result<Vec<usize>> = rest
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<usize>().map_err(|_| Error::Config {
                                line: lineno + 2,
                                msg: format!("bad cell index {t}"),
                            })
                        })
                        .collect();
                    cert.insert(addr, cells?);
                }
                other => {
                    return Err(Error::Config {
                        line: lineno + 2,
                        msg: format!("unknown record {other}"),
                    })
                }
            }
        }
        let domain = Domain::new(dim, half_width, n_cells)?;
        SparseFamily::new(domain, cubes, cert, eta)
    }
}

/// Calderon-Zygmund stopping time on `|f|`: a cube's stopping children are
/// the maximal dyadic descendants (at least 4 cells per side) whose average
/// exceeds `tau` times the cube's own average. `E_Q` is `Q` minus its
/// stopping children. With `tau = 2^{dim+1}` the result is at least
/// 1/2-sparse.
pub fn construct_sparse_family(
    f: &GridFunction,
    lat: &DyadicLattice,
    tau: f64,
) -> Result<SparseFamily> {
    if !(tau > 1.0) {
        return Err(Error::invalid(format!(
            "threshold factor must exceed 1, got {tau}"
        )));
    }
    if f.domain() != lat.domain() {
        return Err(Error::DomainMismatch(
            "sparse family domain mismatch".into(),
        ));
    }
    let absf = f.abs();
    let root_addr = CubeAddress {
        depth: 0,
        idx: [0, 0],
    };
    let root_avg = cube_average(&absf, &lat.root())?;
    if root_avg == 0.0 {
        return Err(Error::invalid(
            "construct_sparse_family requires f not identically zero",
        ));
    }
    let min_side = 4usize;
    let mut cubes = Vec::new();
    let mut certificate: BTreeMap<CubeAddress, Vec<usize>> = BTreeMap::new();
    let mut stack = vec![(root_addr, root_avg)];
    while let Some((addr, avg)) = stack.pop() {
        cubes.push(addr);
        // Maximal descendants with average above tau * avg.
        let mut stopping = Vec::new();
        let mut dfs = lat.children(addr);
        while let Some(c) = dfs.pop() {
            if lat.cells_per_side_at(c.depth) < min_side {
                continue;
            }
            let region = lat.cube(c)?;
            let child_avg = cube_average(&absf, &region)?;
            if child_avg > tau * avg {
                stopping.push((c, child_avg));
            } else if lat.cells_per_side_at(c.depth) / 2 >= min_side {
                dfs.extend(lat.children(c));
            }
        }
        let region = lat.cube(addr)?;
        let mut kept: Vec<usize> = region
            .cells()
            .into_iter()
            .filter(|&cell| {
                !stopping
                    .iter()
                    .any(|(s, _)| lat.ancestor_of_cell(cell, s.depth) == *s)
            })
            .collect();
        kept.sort_unstable();
        certificate.insert(addr, kept);
        stack.extend(stopping);
    }
    // Exact measured sparsity of the constructed certificate.
    let lat_ref = lat;
    let eta = cubes
        .iter()
        .map(|a| {
            let total = lat_ref.cube(*a).unwrap().num_cells();
            certificate[a].len() as f64 / total as f64
        })
        .fold(f64::INFINITY, f64::min);
    SparseFamily::new(
        lat.domain(),
        cubes,
        certificate,
        eta.min(1.0).max(f64::MIN_POSITIVE),
    )
}

/// Validates the stored certificate (containment and disjointness), also
/// builds the greedy smallest-containing-cube assignment, and returns the
/// better of the two certified sparsity constants.
pub fn sparsity_verify(s: &SparseFamily) -> Result<f64> {
    let lat = DyadicLattice::new(s.domain());
    let total = s.domain().total_cells();
    let mut owner = vec![false; total];
    let mut stored_min = f64::INFINITY;
    for addr in s.addresses() {
        let region = lat.cube(*addr)?;
        let cells = s.certificate().get(addr).ok_or_else(|| {
            Error::InvalidCertificate(format!("missing E_Q for {}", addr.label(s.domain().dim())))
        })?;
        for &c in cells {
            if c >= total || !region.contains_cell(c) {
                return Err(Error::InvalidCertificate(format!(
                    "cell {c} outside cube {}",
                    addr.label(s.domain().dim())
                )));
            }
            if owner[c] {
                return Err(Error::InvalidCertificate(format!(
                    "cell {c} claimed by two cubes"
                )));
            }
            owner[c] = true;
        }
        stored_min = stored_min.min(cells.len() as f64 / region.num_cells() as f64);
    }
    // Greedy oracle: each covered cell goes to the smallest containing
    // family cube.
    let mut greedy_counts: BTreeMap<CubeAddress, usize> = BTreeMap::new();
    let mut sorted = s.addresses().to_vec();
    sorted.sort_by_key(|a| std::cmp::Reverse(a.depth));
    let regions: Vec<(CubeAddress, CubeRegion)> = sorted
        .iter()
        .map(|&a| lat.cube(a).map(|r| (a, r)))
        .collect::<Result<_>>()?;
    for cell in 0..total {
        if let Some((addr, _)) = regions.iter().find(|(_, r)| r.contains_cell(cell)) {
            *greedy_counts.entry(*addr).or_insert(0) += 1;
        }
    }
    let greedy_min = s
        .addresses()
        .iter()
        .map(|a| {
            let n = lat.cube(*a).unwrap().num_cells();
            *greedy_counts.get(a).unwrap_or(&0) as f64 / n as f64
        })
        .fold(f64::INFINITY, f64::min);
    Ok(stored_min.max(greedy_min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat1(n: usize) -> DyadicLattice {
        DyadicLattice::new(Domain::new(1, 1.0, n).unwrap())
    }

    #[test]
    fn enumerate_counts_match_geometric_sums() {
        // N=8, 1D: 8 + 4 + 2 + 1 = 15.
        assert_eq!(enumerate_cubes(&lat1(8), 1).unwrap().len(), 15);
        // N=8, 2D: 64 + 16 + 4 + 1 = 85.
        let lat2 = DyadicLattice::new(Domain::new(2, 1.0, 8).unwrap());
        assert_eq!(enumerate_cubes(&lat2, 1).unwrap().len(), 85);
        // N=16, min 4: 4 + 2 + 1 = 7.
        assert_eq!(enumerate_cubes(&lat1(16), 4).unwrap().len(), 7);
    }

    #[test]
    fn lattice_definition_properties_exhaustive() {
        // (1) children of lattice cubes are lattice cubes; (2) any two cubes
        // have the root as common ancestor; (3) the root covers the domain.
        for n in [8usize, 16, 32] {
            for dim in [1usize, 2] {
                let lat = DyadicLattice::new(Domain::new(dim, 1.0, n).unwrap());
                let all = enumerate_cubes(&lat, 1).unwrap();
                let root = lat.root();
                for q in &all {
                    let addr = lat.address_of(q).unwrap();
                    for c in lat.children(addr) {
                        let child = lat.cube(c).unwrap();
                        assert!(q.contains_cube(&child));
                        assert!(lat.address_of(&child).is_ok());
                    }
                    assert!(root.contains_cube(q));
                }
                for cell in 0..lat.domain().total_cells() {
                    assert!(root.contains_cell(cell));
                }
            }
        }
    }

    #[test]
    fn constant_function_gives_root_only() {
        let lat = lat1(16);
        let f = GridFunction::constant(lat.domain(), 2.0).unwrap();
        let fam = construct_sparse_family(&f, &lat, 4.0).unwrap();
        assert_eq!(fam.addresses().len(), 1);
        assert_eq!(
            fam.addresses()[0],
            CubeAddress {
                depth: 0,
                idx: [0, 0]
            }
        );
        assert_eq!(fam.certificate()[&fam.addresses()[0]].len(), 16);
        assert_eq!(sparsity_verify(&fam).unwrap(), 1.0);
    }

    #[test]
    fn half_indicator_does_not_stop() {
        // f = indicator of the left half, tau = 4: child average 1 is not
        // above 4 * (1/2), so the family is just the root.
        let lat = lat1(16);
        let f =
            GridFunction::from_fn(lat.domain(), |x| if x[0] < 0.0 { 1.0 } else { 0.0 }).unwrap();
        let fam = construct_sparse_family(&f, &lat, 4.0).unwrap();
        assert_eq!(fam.addresses().len(), 1);
    }

    #[test]
    fn single_cell_spike_yields_ancestor_chain() {
        let lat = lat1(64);
        let n = 64;
        let spike = 17usize;
        let vals: Vec<f64> = (0..n)
            .map(|i| if i == spike { n as f64 } else { 0.0 })
            .collect();
        let f = GridFunction::from_values(lat.domain(), vals).unwrap();
        let fam = construct_sparse_family(&f, &lat, 4.0).unwrap();
        // Every family cube contains the spike cell; depths strictly grow.
        for addr in fam.addresses() {
            let region = lat.cube(*addr).unwrap();
            assert!(region.contains_cell(spike), "cube {addr:?}");
        }
        assert!(fam.addresses().len() > 1);
        assert!(sparsity_verify(&fam).unwrap() >= 0.5);
    }

    #[test]
    fn stopping_family_is_half_sparse_on_random_data() {
        let lat = lat1(256);
        let mut state = 0x12345678u64;
        let mut rand01 = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for trial in 0..20 {
            let vals: Vec<f64> = (0..256)
                .map(|_| {
                    let u = rand01();
                    // Heavy-tailed values so stopping actually occurs.
                    (1.0 - u).powf(-1.5) - 1.0
                })
                .collect();
            let f = GridFunction::from_values(lat.domain(), vals).unwrap();
            let fam = construct_sparse_family(&f, &lat, 4.0).unwrap();
            let eta = sparsity_verify(&fam).unwrap();
            assert!(eta >= 0.5, "trial {trial}: eta = {eta}");
        }
    }

    #[test]
    fn nested_chain_certificate_arithmetic() {
        // Root (16 cells) > left half (8) > left quarter (4), E = set
        // differences: min ratio 1/2.
        let d = Domain::new(1, 1.0, 16).unwrap();
        let cubes = vec![
            CubeAddress {
                depth: 0,
                idx: [0, 0],
            },
            CubeAddress {
                depth: 1,
                idx: [0, 0],
            },
            CubeAddress {
                depth: 2,
                idx: [0, 0],
            },
        ];
        let mut cert = BTreeMap::new();
        cert.insert(cubes[0], (8..16).collect::<Vec<_>>());
        cert.insert(cubes[1], (4..8).collect::<Vec<_>>());
        cert.insert(cubes[2], (0..4).collect::<Vec<_>>());
        let fam = SparseFamily::new(d, cubes, cert, 0.5).unwrap();
        assert_eq!(sparsity_verify(&fam).unwrap(), 0.5);
    }

    #[test]
    fn overlapping_certificate_is_rejected() {
        let d = Domain::new(1, 1.0, 16).unwrap();
        let cubes = vec![
            CubeAddress {
                depth: 1,
                idx: [0, 0],
            },
            CubeAddress {
                depth: 1,
                idx: [1, 0],
            },
        ];
        let mut cert = BTreeMap::new();
        cert.insert(cubes[0], vec![0, 1, 2]);
        cert.insert(cubes[1], vec![8, 9]);
        let fam = SparseFamily::new(d, cubes.clone(), cert, 0.2).unwrap();
        assert!(sparsity_verify(&fam).is_ok());

        let mut bad = BTreeMap::new();
        bad.insert(cubes[0], vec![0, 1, 2]);
        bad.insert(cubes[1], vec![2, 8, 9]); // cell 2 outside the second cube
        let fam = SparseFamily::new(d, cubes, bad, 0.2).unwrap();
        assert!(matches!(
            sparsity_verify(&fam),
            Err(Error::InvalidCertificate(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let lat = lat1(32);
        let f = GridFunction::from_fn(lat.domain(), |x| 1.0 / (x[0].abs() + 0.05)).unwrap();
        let fam = construct_sparse_family(&f, &lat, 4.0).unwrap();
        let mut buf = Vec::new();
        fam.write_text(&mut buf).unwrap();
        let back = SparseFamily::read_text(&mut buf.as_slice()).unwrap();
        assert_eq!(fam.addresses(), back.addresses());
        assert_eq!(fam.certificate(), back.certificate());
        assert_eq!(
            sparsity_verify(&fam).unwrap(),
            sparsity_verify(&back).unwrap()
        );
    }

    #[test]
    fn rejects_tau_at_or_below_one() {
        let lat = lat1(16);
        let f = GridFunction::constant(lat.domain(), 1.0).unwrap();
        assert!(construct_sparse_family(&f, &lat, 1.0).is_err());
        assert!(construct_sparse_family(&f, &lat, 0.5).is_err());
    }
}
