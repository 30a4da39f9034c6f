use crate::alphabet::{Alphabet, Symbol, Word};

/// A deterministic, never-ending source of symbols.
///
/// Implementations are single-consumer. `position` counts symbols yielded so far.
pub trait SymbolStream: Send {
    fn alphabet(&self) -> &Alphabet;

    fn next_symbol(&mut self) -> Symbol;

    fn position(&self) -> u64;

    /// Pulls the next `n` symbols into a word.
    fn take_word(&mut self, n: usize) -> Word {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push(self.next_symbol());
        }
        Word::from_letters(v)
    }
}

impl<S: SymbolStream + ?Sized> SymbolStream for Box<S> {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }

    #[inline]
    fn next_symbol(&mut self) -> Symbol {
        (**self).next_symbol()
    }

    fn position(&self) -> u64 {
        (**self).position()
    }
}

pub type BoxedStream = Box<dyn SymbolStream>;

/// Replays a finite word. Reading past its end is a caller error and panics;
/// callers clamp horizons to [`FiniteStream::len`].
#[derive(Debug, Clone)]
pub struct FiniteStream {
    alphabet: Alphabet,
    letters: Vec<Symbol>,
    pos: usize,
}

impl FiniteStream {
    pub fn new(alphabet: Alphabet, word: Word) -> Self {
        FiniteStream {
            alphabet,
            letters: word.into_letters(),
            pos: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl SymbolStream for FiniteStream {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn next_symbol(&mut self) -> Symbol {
        let s = *self
            .letters
            .get(self.pos)
            .unwrap_or_else(|| panic!("finite stream exhausted after {} symbols", self.pos));
        self.pos += 1;
        s
    }

    fn position(&self) -> u64 {
        self.pos as u64
    }
}
