use super::ProjSystem;
use crate::opcore::Op;
use crate::tol::PROJ_TOL;
use crate::{Error, Result};

fn same_dim(a: &ProjSystem, b: &ProjSystem) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `P ⪰ Q`: every product `pq` equals `p` or vanishes.
pub fn finer(p: &ProjSystem, q: &ProjSystem) -> Result<bool> {
    same_dim(p, q)?;
    for pp in p.projectors() {
        for qq in q.projectors() {
            let prod = pp.as_op() * qq.as_op();
            let is_p = (&prod - pp.as_op()).op_norm() <= PROJ_TOL;
            if !is_p && prod.op_norm() > PROJ_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest commutator norm between projectors of different systems.
fn max_commutator(systems: &[ProjSystem]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            same_dim(a, b)?;
            for p in a.projectors() {
                for q in b.projectors() {
                    worst = worst.max(p.commutator(q).op_norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Whether all projectors across the family commute.
pub fn consistent(systems: &[ProjSystem]) -> Result<bool> {
    Ok(max_commutator(systems)? <= PROJ_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeOp {
    Join,
    Meet,
}

/// A lattice result with, per output projector, the indices it was built
/// from: for a join the chosen member of each input system, for a meet the
/// join elements that were summed.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeResult {
    pub system: ProjSystem,
    pub op: LatticeOp,
    pub provenance: Vec<Vec<usize>>,
}

fn require_family(systems: &[ProjSystem]) -> Result<()> {
    if systems.is_empty() {
        return Err(Error::InvalidSystem("empty family".into()));
    }
    let worst = max_commutator(systems)?;
    if worst > PROJ_TOL {
        return Err(Error::InconsistentFamily(worst));
    }
    Ok(())
}

/// Least upper bound: the nonzero products of one member per system.
pub fn join(systems: &[ProjSystem]) -> Result<LatticeResult> {
    require_family(systems)?;
    let dim = systems[0].dim();
    // Partial products in lexicographic order of the chosen indices.
    let mut partial: Vec<(Op, Vec<usize>)> = vec![(Op::identity(dim), Vec::new())];
    for s in systems {
        let mut next = Vec::new();
        for (acc, path) in &partial {
            for (k, p) in s.projectors().iter().enumerate() {
                let prod = acc * p.as_op();
                if prod.op_norm() > PROJ_TOL {
                    let mut path = path.clone();
                    path.push(k);
                    next.push((prod, path));
                }
            }
        }
        partial = next;
    }
    let mut kept: Vec<(Op, Vec<usize>)> = Vec::new();
    for (op, path) in partial {
        if !kept.iter().any(|(o, _)| (o - &op).op_norm() <= PROJ_TOL) {
            kept.push((op, path));
        }
    }
    let (ops, provenance): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
    Ok(LatticeResult {
        system: ProjSystem::from_parts_unchecked(dim, ops.into_iter().map(|o| o.hermitian_part()).collect()),
        op: LatticeOp::Join,
        provenance,
    })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Greatest lower bound: join elements summed over the connected
/// components of "lies under a common input projector".
pub fn meet(systems: &[ProjSystem]) -> Result<LatticeResult> {
    let j = join(systems)?;
    let elems = j.system.projectors();
    let n = elems.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for s in systems {
        for p in s.projectors() {
            let under: Vec<usize> = (0..n)
                .filter(|&e| (p.as_op() * elems[e].as_op() - elems[e].as_op()).op_norm() <= PROJ_TOL)
                .collect();
            for w in under.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for e in 0..n {
        let root = find(&mut parent, e);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(e),
            None => groups.push((root, vec![e])),
        }
    }
    let dim = j.system.dim();
    let mut ops = Vec::with_capacity(groups.len());
    let mut provenance = Vec::with_capacity(groups.len());
    for (_, g) in groups {
        let mut sum = Op::zeros(dim);
        for &e in &g {
            sum = &sum + elems[e].as_op();
        }
        ops.push(sum);
        provenance.push(g);
    }
    Ok(LatticeResult {
        system: ProjSystem::from_parts_unchecked(dim, ops),
        op: LatticeOp::Meet,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::C64;

    fn diag_system(groups: &[&[usize]], dim: usize) -> ProjSystem {
        let g: Vec<Vec<usize>> = groups.iter().map(|g| g.to_vec()).collect();
        ProjSystem::from_basis_groups(&Op::identity(dim), &g).unwrap()
    }

    fn bell() -> ProjSystem {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = |v: [f64; 4]| v.iter().map(|&x| C64::new(x * s, 0.0)).collect::<Vec<_>>();
        let vecs = [r([1., 0., 0., 1.]), r([1., 0., 0., -1.]), r([0., 1., 1., 0.]), r([0., 1., -1., 0.])];
        ProjSystem::new(vecs.iter().map(|v| Op::outer(v)).collect()).unwrap()
    }

    #[test]
    fn refinement_examples() {
        let c = ProjSystem::computational(2);
        let t = ProjSystem::trivial(2);
        assert!(finer(&c, &t).unwrap());
        assert!(!finer(&t, &c).unwrap());
        let c4 = ProjSystem::computational(4);
        assert!(!finer(&bell(), &c4).unwrap());
        assert!(!finer(&c4, &bell()).unwrap());
        assert!(finer(&c, &ProjSystem::trivial(3)).is_err());
    }

    #[test]
    fn consistency_examples() {
        let a = diag_system(&[&[0, 1], &[2, 3]], 4);
        let b = diag_system(&[&[0], &[1, 2, 3]], 4);
        assert!(consistent(&[a.clone(), b]).unwrap());
        assert!(!consistent(&[ProjSystem::computational(4), bell()]).unwrap());
        assert!(consistent(&[a]).unwrap());
        let worst = max_commutator(&[ProjSystem::computational(4), bell()]).unwrap();
        assert!(worst > 0.1);
    }

    #[test]
    fn join_and_meet_examples() {
        let p = diag_system(&[&[0, 1], &[2, 3]], 4);
        let q = ProjSystem::computational(4);
        let j = join(&[p.clone(), q.clone()]).unwrap();
        let m = meet(&[p.clone(), q.clone()]).unwrap();
        assert!(finer(&j.system, &q).unwrap() && finer(&q, &j.system).unwrap());
        assert!(finer(&m.system, &p).unwrap() && finer(&p, &m.system).unwrap());
        assert_eq!(j.system.len(), 4);
        assert_eq!(m.system.len(), 2);

        let r = diag_system(&[&[0, 2], &[1, 3]], 4);
        let j = join(&[p.clone(), r.clone()]).unwrap();
        let m = meet(&[p.clone(), r.clone()]).unwrap();
        assert_eq!(j.system.len(), 4);
        assert!(finer(&j.system, &q).unwrap() && finer(&q, &j.system).unwrap());
        assert_eq!(m.system.len(), 1);
        assert!(m.system.projectors()[0].max_abs_diff(&Op::identity(4)) < 1e-12);
        for s in [&p, &r] {
            assert!(finer(&j.system, s).unwrap());
            assert!(finer(s, &m.system).unwrap());
        }
        assert_eq!(j.provenance, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let single = join(std::slice::from_ref(&p)).unwrap();
        assert_eq!(single.system.len(), 2);
        let single = meet(std::slice::from_ref(&p)).unwrap();
        assert!(finer(&single.system, &p).unwrap() && finer(&p, &single.system).unwrap());
    }

    #[test]
    fn inconsistent_family_is_rejected() {
        let e = join(&[ProjSystem::computational(4), bell()]).unwrap_err();
        assert!(matches!(e, Error::InconsistentFamily(_)));
    }
}
