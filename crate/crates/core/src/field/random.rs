use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{Field, FieldMatrix};

/// Anything that can emit uniform field elements.
pub trait RandomSource {
    fn draw(&mut self, field: Field) -> u32;
}

/// Root seed; each source node gets its own ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSeed(pub u64);

impl SplitSeed {
    pub fn stream(self, index: u64) -> StreamRng {
        let mut inner = ChaCha20Rng::seed_from_u64(self.0);
        inner.set_stream(index);
        StreamRng { inner }
    }
}

#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha20Rng,
}

impl RandomSource for StreamRng {
    fn draw(&mut self, field: Field) -> u32 {
        self.inner.gen_range(0..field.q())
    }
}

/// Replays a fixed coordinate sequence; the exhaustive drivers feed every
/// point of the randomness space through this.
#[derive(Debug, Clone)]
pub struct ScriptedSource<'a> {
    values: &'a [u32],
    pos: usize,
}

impl<'a> ScriptedSource<'a> {
    pub fn new(values: &'a [u32]) -> Self {
        ScriptedSource { values, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl RandomSource for ScriptedSource<'_> {
    fn draw(&mut self, field: Field) -> u32 {
        let v = *self
            .values
            .get(self.pos)
            .expect("scripted randomness exhausted");
        self.pos += 1;
        v % field.q()
    }
}

pub fn symmetric_coord_count(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Draws the upper triangle row by row and mirrors it.
pub fn sample_symmetric(field: Field, d: usize, rng: &mut dyn RandomSource) -> FieldMatrix {
    let mut m = FieldMatrix::zeros(field, d, d);
    for i in 0..d {
        for j in i..d {
            let v = rng.draw(field);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

pub fn symmetric_from_coords(field: Field, d: usize, coords: &[u32]) -> FieldMatrix {
    assert_eq!(coords.len(), symmetric_coord_count(d));
    sample_symmetric(field, d, &mut ScriptedSource::new(coords))
}
