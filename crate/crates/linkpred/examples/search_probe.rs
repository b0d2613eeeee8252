//! Times the ranking stage alone by caching embeddings on disk.
//!
//! `search_probe gen <n> <dir>` embeds a synthetic preferential-attachment
//! graph once and saves the embedding plus edge list; `search_probe run
//! <n> <dir> [k]` loads the cache and times `euclidean_rank`, printing a
//! result fingerprint so engine changes can be checked for identical output.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::time::Instant;

use linkpred::predictors::{embed, euclidean_rank};
use linkpred::spectral::{EigenOptions, SpectralEmbedding};
use linkpred::synth;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [mode, n, dir] if mode == "gen" => gen(n.parse().unwrap(), dir),
        [mode, n, dir] if mode == "run" => run(n.parse().unwrap(), dir, None, false),
        [mode, n, dir, k] if mode == "run" => {
            run(n.parse().unwrap(), dir, Some(k.parse().unwrap()), false)
        }
        [mode, n, dir] if mode == "check" => run(n.parse().unwrap(), dir, None, true),
        _ => {
            eprintln!(
                "usage: search_probe gen <n> <dir> | search_probe run <n> <dir> [k] \
                 | search_probe check <n> <dir>"
            );
            std::process::exit(2);
        }
    }
}

fn cache_path(n: usize, dir: &str) -> String {
    format!("{dir}/probe_{n}.bin")
}

fn gen(n: usize, dir: &str) {
    let g = synth::preferential_attachment(n, 10, 7);
    eprintln!("graph: {} vertices, {} edges", g.vertex_count(), g.edge_count());
    let t0 = Instant::now();
    let emb = embed(&g, 8, &EigenOptions::default()).unwrap();
    eprintln!("embed: {:.1} s", t0.elapsed().as_secs_f64());
    let mut w = BufWriter::new(File::create(cache_path(n, dir)).unwrap());
    write_u64(&mut w, n as u64);
    write_u64(&mut w, emb.dim() as u64);
    for &v in emb.eigenvalues() {
        w.write_all(&v.to_le_bytes()).unwrap();
    }
    for &c in emb.coords() {
        w.write_all(&c.to_le_bytes()).unwrap();
    }
    let edges: Vec<(u32, u32)> = g.edges().collect();
    write_u64(&mut w, edges.len() as u64);
    for (a, b) in edges {
        w.write_all(&a.to_le_bytes()).unwrap();
        w.write_all(&b.to_le_bytes()).unwrap();
    }
    w.flush().unwrap();
    eprintln!("cached {}", cache_path(n, dir));
}

fn run(n: usize, dir: &str, k: Option<usize>, check: bool) {
    let mut r = BufReader::new(File::open(cache_path(n, dir)).unwrap());
    let stored_n = read_u64(&mut r) as usize;
    assert_eq!(stored_n, n, "cache holds a different graph size");
    let dim = read_u64(&mut r) as usize;
    let eigenvalues: Vec<f64> = (0..dim).map(|_| read_f64(&mut r)).collect();
    let coords: Vec<f64> = (0..n * dim).map(|_| read_f64(&mut r)).collect();
    let emb = SpectralEmbedding::new(dim, eigenvalues, coords).unwrap();
    let edge_count = read_u64(&mut r) as usize;
    let mut excluded: HashSet<(u32, u32)> = HashSet::with_capacity(edge_count);
    for _ in 0..edge_count {
        excluded.insert((read_u32(&mut r), read_u32(&mut r)));
    }
    let k = k.unwrap_or(n / 10);
    let t0 = Instant::now();
    let predictions = euclidean_rank(&emb, &excluded, k).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    println!(
        "n {n}: {} edges, k {k}, search {secs:.2} s, {} results, fingerprint {:016x}",
        edge_count,
        predictions.len(),
        fingerprint(&predictions)
    );
    if check {
        let t1 = Instant::now();
        let want = brute_rank(&emb, &excluded, k);
        let brute_secs = t1.elapsed().as_secs_f64();
        assert_eq!(
            predictions.len(),
            want.len(),
            "result count differs from brute force"
        );
        for (idx, (got, exp)) in predictions.iter().zip(&want).enumerate() {
            assert!(
                got.x == exp.x && got.y == exp.y && got.score == exp.score,
                "rank {idx}: got ({}, {}, {}), brute force ({}, {}, {})",
                got.x,
                got.y,
                got.score,
                exp.x,
                exp.y,
                exp.score
            );
        }
        println!("check: identical to brute force over all pairs ({brute_secs:.1} s)");
    }
}

/// Full scan over all non-adjacent pairs with the same score and tie rules.
fn brute_rank(
    emb: &SpectralEmbedding,
    excluded: &HashSet<(u32, u32)>,
    k: usize,
) -> Vec<linkpred::predictors::ScoredPair> {
    let n = emb.vertex_count();
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(a, b) in excluded {
        rows[a as usize].push(b);
        rows[b as usize].push(a);
    }
    for row in &mut rows {
        row.sort_unstable();
    }
    let points = emb.point_set();
    let mut top: Vec<(f64, u32, u32)> = Vec::new();
    let mut bar = f64::INFINITY;
    for i in 0..n as u32 {
        let pi = points.point(i);
        let row = &rows[i as usize];
        for j in (i + 1)..n as u32 {
            if row.binary_search(&j).is_ok() {
                continue;
            }
            let d = linkpred::closepairs::dist_sq(pi, points.point(j));
            if d > bar {
                continue;
            }
            top.push((d, i, j));
            if top.len() >= 2 * k {
                top.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
                top.truncate(k);
                bar = top.last().unwrap().0;
            }
        }
    }
    top.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    top.truncate(k);
    top.into_iter()
        .map(|(d, i, j)| linkpred::predictors::ScoredPair {
            x: i,
            y: j,
            score: -d,
        })
        .collect()
}

fn fingerprint(predictions: &[linkpred::predictors::ScoredPair]) -> u64 {
    let mut h = 0u64;
    for p in predictions {
        for part in [p.x as u64, p.y as u64, p.score.to_bits()] {
            h = h.wrapping_mul(0x100000001b3).wrapping_add(part);
        }
    }
    h
}

fn write_u64(w: &mut impl Write, v: u64) {
    w.write_all(&v.to_le_bytes()).unwrap();
}

fn read_u64(r: &mut impl Read) -> u64 {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).unwrap();
    u64::from_le_bytes(buf)
}

fn read_u32(r: &mut impl Read) -> u32 {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).unwrap();
    u32::from_le_bytes(buf)
}

fn read_f64(r: &mut impl Read) -> f64 {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).unwrap();
    f64::from_le_bytes(buf)
}
