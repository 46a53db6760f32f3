pub mod expect;
pub mod free_energy;
pub mod orbit;
pub mod solve;
pub mod verify;

use rayon::prelude::*;

use crate::error::Result;

/// Parallel map over a grid; results come back in grid order and the first
/// error in grid order wins.
pub(crate) fn scan<T, U, F>(grid: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> Result<U> + Sync + Send,
{
    let results: Vec<Result<U>> = grid.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    results.into_iter().collect()
}
