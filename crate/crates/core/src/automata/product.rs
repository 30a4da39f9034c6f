use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::stream::SymbolStream;
use crate::weight::Weight;

/// `Z(n) = (X(n), Y(n))` over the product alphabet.
pub struct JoinedStream<X, Y> {
    left: X,
    right: Y,
    alphabet: Alphabet,
    right_size: Symbol,
}

pub fn join_streams<X: SymbolStream, Y: SymbolStream>(left: X, right: Y) -> JoinedStream<X, Y> {
    let alphabet = Alphabet::product(left.alphabet(), right.alphabet());
    let right_size = right.alphabet().size() as Symbol;
    JoinedStream {
        left,
        right,
        alphabet,
        right_size,
    }
}

impl<X: SymbolStream, Y: SymbolStream> SymbolStream for JoinedStream<X, Y> {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    fn next_symbol(&mut self) -> Symbol {
        let a = self.left.next_symbol();
        let b = self.right.next_symbol();
        a * self.right_size + b
    }

    fn position(&self) -> u64 {
        self.left.position()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One coordinate of a stream over a product alphabet.
pub struct ProjectedStream<Z> {
    inner: Z,
    side: Side,
    alphabet: Alphabet,
    right_size: Symbol,
}

pub fn project<Z: SymbolStream>(z: Z, side: Side) -> Result<ProjectedStream<Z>> {
    let (left, right) = z.alphabet().factors().ok_or(Error::NotProduct)?;
    let alphabet = match side {
        Side::Left => left.clone(),
        Side::Right => right.clone(),
    };
    let right_size = right.size() as Symbol;
    Ok(ProjectedStream {
        inner: z,
        side,
        alphabet,
        right_size,
    })
}

impl<Z: SymbolStream> SymbolStream for ProjectedStream<Z> {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    fn next_symbol(&mut self) -> Symbol {
        let z = self.inner.next_symbol();
        match self.side {
            Side::Left => z / self.right_size,
            Side::Right => z % self.right_size,
        }
    }

    fn position(&self) -> u64 {
        self.inner.position()
    }
}

/// `xi(a, b) = mu(a) * nu(b)` on `A x B`.
pub fn join_measure<W: Weight>(mu: &BernoulliMeasure<W>, nu: &BernoulliMeasure<W>) -> BernoulliMeasure<W> {
    let alphabet = Alphabet::product(mu.alphabet(), nu.alphabet());
    let mut weights = Vec::with_capacity(alphabet.size());
    for a in mu.weights() {
        for b in nu.weights() {
            weights.push(a.clone() * b.clone());
        }
    }
    BernoulliMeasure::new_unchecked(alphabet, weights)
}
