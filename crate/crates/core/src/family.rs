//! Compatible families under restriction: the finite-precision stand-in for
//! the full Witt vector ring (the limit of its truncations), with truncation
//! and extension along the splitting that a Frobenius lift provides.

use crate::delta::DeltaStructure;
use crate::error::{Error, Result};
use crate::witt::{WittContext, WittVec};
use crate::wittpoly::GhostVector;

/// Levels 1..=n of a V-complete family: `levels[k]` has length k+1 and
/// restricts to `levels[k-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WittFamily {
    levels: Vec<WittVec>,
}

/// Validate a family: level k must have length k and restrict to level k-1.
/// The error carries the first failing level (1-based).
pub fn v_complete_family(ctx: &WittContext, levels: Vec<WittVec>) -> Result<WittFamily> {
    if levels.is_empty() {
        return Err(Error::InvalidInput("family must have at least level 1".into()));
    }
    for (idx, v) in levels.iter().enumerate() {
        if v.len() != idx + 1 {
            return Err(Error::IncompatibleFamily(idx + 1));
        }
    }
    for idx in 1..levels.len() {
        if ctx.restriction(&levels[idx])? != levels[idx - 1] {
            return Err(Error::IncompatibleFamily(idx + 1));
        }
    }
    Ok(WittFamily { levels })
}

impl WittFamily {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Option<&WittVec> {
        self.levels.get(n.checked_sub(1)?)
    }

    pub fn top(&self) -> &WittVec {
        self.levels.last().expect("nonempty")
    }

    /// Drop levels above `n`.
    pub fn truncate(&self, n: usize) -> Result<WittFamily> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::InvalidInput(format!(
                "cannot truncate a depth-{} family to {n}",
                self.levels.len()
            )));
        }
        Ok(WittFamily {
            levels: self.levels[..n].to_vec(),
        })
    }

    /// Extend one level using the splitting a Frobenius lift provides: the
    /// new top has ghost vector `(ghost(top), phi(last ghost))`.
    pub fn extend(&self, ctx: &WittContext, ds: &DeltaStructure) -> Result<WittFamily> {
        let top = self.top();
        if top.len() + 1 > ctx.max_len() {
            return Err(Error::LengthOverflow(top.len() + 1, ctx.max_len()));
        }
        let g = ctx.ghost(top)?;
        let mut components = g.components.clone();
        let last = components.last().expect("nonempty").clone();
        components.push(ds.phi(&last)?);
        let extended = ctx.from_ghost(&GhostVector::new(ctx.p(), components)?)?;
        let mut levels = self.levels.clone();
        levels.push(extended);
        v_complete_family(ctx, levels)
    }

    /// The family of all restrictions of one Witt vector.
    pub fn from_vector(ctx: &WittContext, top: &WittVec) -> Result<WittFamily> {
        let mut levels = vec![top.clone()];
        let mut current = top.clone();
        while current.len() > 1 {
            current = ctx.restriction(&current)?;
            levels.push(current.clone());
        }
        levels.reverse();
        v_complete_family(ctx, levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{PhiMap, RingHandle};

    fn setup() -> (WittContext, DeltaStructure) {
        let z = RingHandle::integers();
        let ctx = WittContext::new(2, z.clone(), 4).unwrap();
        let ds = DeltaStructure::phi_lift(z, 2, PhiMap::Identity).unwrap();
        (ctx, ds)
    }

    #[test]
    fn cofree_lift_restrictions_are_compatible() {
        let (ctx, ds) = setup();
        let z = ctx.ring().clone();
        let lam = ctx.cofree_lift(&ds, &z.from_int(2), 4).unwrap();
        let family = WittFamily::from_vector(&ctx, &lam).unwrap();
        assert_eq!(family.depth(), 4);
        assert_eq!(family.level(3).unwrap().coords.len(), 3);
    }

    #[test]
    fn truncate_then_extend_is_identity_below_top() {
        let (ctx, ds) = setup();
        let z = ctx.ring().clone();
        let lam = ctx.cofree_lift(&ds, &z.from_int(3), 4).unwrap();
        let family = WittFamily::from_vector(&ctx, &lam).unwrap();
        let truncated = family.truncate(3).unwrap();
        let extended = truncated.extend(&ctx, &ds).unwrap();
        // The splitting recovers the cofree family exactly.
        assert_eq!(extended, family);
        // In general R(extend(x)) = x.
        assert_eq!(
            ctx.restriction(extended.top()).unwrap(),
            *truncated.top()
        );
    }

    #[test]
    fn corrupted_level_is_reported() {
        let (ctx, _) = setup();
        let z = ctx.ring().clone();
        let l1 = ctx.from_coords(vec![z.from_int(1)]).unwrap();
        let bad_l2 = ctx.from_coords(vec![z.from_int(7), z.from_int(0)]).unwrap();
        let l3 = ctx
            .from_coords(vec![z.from_int(7), z.from_int(0), z.from_int(1)])
            .unwrap();
        assert!(matches!(
            v_complete_family(&ctx, vec![l1, bad_l2, l3]),
            Err(Error::IncompatibleFamily(2))
        ));
    }

    #[test]
    fn extension_of_arbitrary_families() {
        // Extension works on any compatible family over a delta-ring, and
        // restricting the extension recovers the original top.
        let (ctx, ds) = setup();
        let mut rng = crate::prng::SplitMix64::new(50);
        let top = ctx.sample(3, &mut rng);
        let family = WittFamily::from_vector(&ctx, &top).unwrap();
        let extended = family.extend(&ctx, &ds).unwrap();
        assert_eq!(ctx.restriction(extended.top()).unwrap(), top);
    }
}
