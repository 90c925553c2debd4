use super::{Group, Membership};

/// Element `(a, b, c)` of the integer Heisenberg group, identified with the
/// matrix `[[1, a, c], [0, 1, b], [0, 0, 1]]`.
///
/// Product convention: `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`, which is
/// exactly the matrix product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisenbergElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl HeisenbergElement {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        HeisenbergElement { a, b, c }
    }

    /// The center is `{(0, 0, c)}`; the distinguished subgroup `N` is taken to
    /// be the whole (integral) center.
    pub fn center_membership(&self) -> Membership {
        let in_center = self.a == 0 && self.b == 0;
        Membership { in_center, in_n: in_center }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HeisenbergGroup;

impl HeisenbergGroup {
    /// `x, y, x⁻¹, y⁻¹` with `x = (1,0,0)`, `y = (0,1,0)`.
    pub fn generators() -> [HeisenbergElement; 4] {
        [
            HeisenbergElement::new(1, 0, 0),
            HeisenbergElement::new(0, 1, 0),
            HeisenbergElement::new(-1, 0, 0),
            HeisenbergElement::new(0, -1, 0),
        ]
    }
}

impl Group for HeisenbergGroup {
    type Elem = HeisenbergElement;

    fn identity(&self) -> HeisenbergElement {
        HeisenbergElement::new(0, 0, 0)
    }

    fn mul(&self, g: &HeisenbergElement, h: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement::new(g.a + h.a, g.b + h.b, g.c + h.c + g.a * h.b)
    }

    fn inv(&self, g: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement::new(-g.a, -g.b, -g.c + g.a * g.b)
    }
}
