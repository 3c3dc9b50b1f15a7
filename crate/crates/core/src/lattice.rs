//! Site indexing on the periodic N³ lattice, `site = i + N(j + Nk)`.

pub fn site_count(n: usize) -> usize {
    n * n * n
}

pub fn site_coords(n: usize, site: usize) -> [usize; 3] {
    [site % n, (site / n) % n, site / (n * n)]
}

pub fn site_index(n: usize, c: [usize; 3]) -> usize {
    c[0] + n * (c[1] + n * c[2])
}

/// Neighbor of `site` `step` sites along `dir`, with periodic wrap.
pub fn neighbor(n: usize, site: usize, dir: usize, step: isize) -> usize {
    let mut c = site_coords(n, site);
    c[dir] = (c[dir] as isize + step).rem_euclid(n as isize) as usize;
    site_index(n, c)
}
