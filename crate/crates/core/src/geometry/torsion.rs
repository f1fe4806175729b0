use super::component::{ComponentField, Slot, SlotKind, Symmetry};
use super::{Connection, DConnection, NGeometry};

/// `T^α_{βγ} = Γ^α_{γβ} − Γ^α_{βγ} − W^α_{βγ}`.
pub fn torsion(geo: &NGeometry, conn: &Connection) -> ComponentField {
    let slots = [
        Slot::up(SlotKind::Full),
        Slot::down(SlotKind::Full),
        Slot::down(SlotKind::Full),
    ];
    ComponentField::from_fn("T", &slots, geo.n(), geo.m(), |x| {
        let (a, b, c) = (x[0], x[1], x[2]);
        conn.get(a, c, b) - conn.get(a, b, c) - geo.w(a, b, c)
    })
    .with_symmetry(Symmetry::Antisymmetric(1, 2))
}

/// The five independent torsion blocks of a d-connection.
#[derive(Debug, Clone)]
pub struct DTorsion {
    /// `T^i_{jk} = L^i_{kj} − L^i_{jk}`
    pub hjk: ComponentField,
    /// `T^i_{ja} = −C^i_{ja}`
    pub hja: ComponentField,
    /// `T^a_{ji} = Ω^a_{ji}`
    pub aji: ComponentField,
    /// `T^a_{bi} = ∂_b N_i^a − L̃^a_{bi}`
    pub abi: ComponentField,
    /// `T^a_{bc} = C̃^a_{cb} − C̃^a_{bc}`
    pub abc: ComponentField,
}

impl DTorsion {
    pub fn blocks(&self) -> [&ComponentField; 5] {
        [&self.hjk, &self.hja, &self.aji, &self.abi, &self.abc]
    }

    /// Full index of each block entry, for comparison with [`torsion`].
    pub fn full_index(&self, block: usize, ix: &[usize]) -> [usize; 3] {
        let n = self.hjk.n();
        match block {
            0 => [ix[0], ix[1], ix[2]],
            1 => [ix[0], ix[1], n + ix[2]],
            2 => [n + ix[0], ix[1], ix[2]],
            3 => [n + ix[0], n + ix[1], ix[2]],
            _ => [n + ix[0], n + ix[1], n + ix[2]],
        }
    }
}

pub fn dtorsion(geo: &NGeometry, d: &DConnection) -> DTorsion {
    let (n, m) = (geo.n(), geo.m());
    use SlotKind::{H, V};
    let s = |a, b, c| [Slot::up(a), Slot::down(b), Slot::down(c)];
    DTorsion {
        hjk: ComponentField::from_fn("T", &s(H, H, H), n, m, |x| {
            d.l(x[0], x[2], x[1]) - d.l(x[0], x[1], x[2])
        }),
        hja: ComponentField::from_fn("T", &s(H, H, V), n, m, |x| -d.c(x[0], x[1], x[2])),
        aji: ComponentField::from_fn("T", &s(V, H, H), n, m, |x| {
            geo.omega().get(&[x[0], x[1], x[2]]).clone()
        }),
        abi: ComponentField::from_fn("T", &s(V, V, H), n, m, |x| {
            geo.dn(x[0], x[1], x[2]) - d.lt(x[0], x[1], x[2])
        }),
        abc: ComponentField::from_fn("T", &s(V, V, V), n, m, |x| {
            d.ct(x[0], x[2], x[1]) - d.ct(x[0], x[1], x[2])
        }),
    }
}

/// `Q_{γαβ} = −(e_γ g_{αβ} − Γ^δ_{αγ} g_{δβ} − Γ^δ_{βγ} g_{αδ})`.
pub fn nonmetricity(geo: &NGeometry, conn: &Connection) -> ComponentField {
    let d = geo.dim();
    let slots = [Slot::down(SlotKind::Full); 3];
    ComponentField::from_fn("Q", &slots, geo.n(), geo.m(), |x| {
        let (c, a, b) = (x[0], x[1], x[2]);
        let mut s = geo.e(c, &geo.g(a, b));
        for delta in 0..d {
            let gdb = geo.g(delta, b);
            if !gdb.is_zero() {
                s = s - conn.get(delta, a, c) * gdb;
            }
            let gad = geo.g(a, delta);
            if !gad.is_zero() {
                s = s - conn.get(delta, b, c) * gad;
            }
        }
        -s
    })
    .with_symmetry(Symmetry::Symmetric(1, 2))
}

