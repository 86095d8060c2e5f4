#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use tcbforge::geometry::{BendLine, FlexZone, GridFrame, GridIndex, Point2, Stackup};
use tcbforge::layout::{validate_design, BoardDesign, Layer, Outline, Socket, Trace, Via};

pub fn board_from(text: &str) -> BoardDesign {
    tcbforge::dsl::parse(text).unwrap_or_else(|e| panic!("fixture does not parse: {e:?}"))
}

pub const LED_SAMPLE: &str = include_str!("../../samples/led_board.tcb");
pub const HOTWIRE_SAMPLE: &str = include_str!("../../samples/hotwire_cutter.tcb");

const NAMES: [&str; 5] = ["board", "led \"v2\"", "back\\slash", "Schaltung ü", "x"];

/// A structurally valid board drawn from `seed`: rect or chamfered outline,
/// random walks for traces, vias, sockets, parallel bends and flex zones.
/// Dimensions are arbitrary floats so text round-trips exercise full precision.
pub fn random_board(seed: u64) -> BoardDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(20.0..80.0);
    let h = rng.gen_range(15.0..60.0);
    let outline = if rng.gen_bool(0.3) {
        let c = rng.gen_range(2.0..6.0);
        Outline::Polygon {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(w - c, 0.0),
                Point2::new(w, c),
                Point2::new(w, h),
                Point2::new(0.0, h),
            ],
        }
    } else {
        Outline::Rect {
            width: w,
            height: h,
        }
    };
    let heights = [(); 4].map(|_| rng.gen_range(0.25..0.45));
    let mut b = BoardDesign::new(
        *NAMES.choose(&mut rng).unwrap(),
        outline,
        Stackup::new(heights).unwrap(),
    );
    b.pitch = *[1.0, 1.27, 2.0, 2.54].choose(&mut rng).unwrap() * rng.gen_range(1.0..1.2);
    b.margin = rng.gen_range(1.6..3.0);

    let planar = b.planar_outline().unwrap();
    let frame = GridFrame::for_outline(&planar, b.pitch, b.margin);
    let (nu, nv) = tcbforge::geometry::lattice_extent(&planar, b.pitch, b.margin).unwrap();
    let sites: Vec<GridIndex> = (0..nv)
        .flat_map(|v| (0..nu).map(move |u| GridIndex::new(u, v)))
        .filter(|&i| frame.contains(&planar, i))
        .collect();
    let inside: HashSet<GridIndex> = sites.iter().copied().collect();

    for k in 0..rng.gen_range(0..6) {
        let mut path = vec![*sites.choose(&mut rng).unwrap()];
        for _ in 0..rng.gen_range(1..5) {
            let last = *path.last().unwrap();
            let steps: Vec<GridIndex> = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1)]
                .iter()
                .flat_map(|&(du, dv)| {
                    let n = rng.gen_range(1..4);
                    (1..=n).map(move |s| GridIndex::new(last.u + du * s, last.v + dv * s))
                })
                .filter(|i| inside.contains(i))
                .collect();
            if let Some(&next) = steps.choose(&mut rng) {
                path.push(next);
            }
        }
        if path.len() < 2 {
            continue;
        }
        let layer = if rng.gen_bool(0.5) {
            Layer::Top
        } else {
            Layer::Bottom
        };
        let mut t = Trace::new(format!("t{k}"), layer, path);
        t.width = rng.gen_range(0.4..1.5);
        let cap = if layer == Layer::Top {
            heights[0]
        } else {
            heights[3]
        };
        t.height = rng.gen_range(0.1..cap);
        t.plated = rng.gen_bool(0.8);
        if rng.gen_bool(0.4) {
            t.current = Some(rng.gen_range(0.0..7.0));
        }
        b.traces.push(t);
    }

    let mut used = HashSet::new();
    for k in 0..rng.gen_range(0..4) {
        let at = *sites.choose(&mut rng).unwrap();
        if used.insert(at) {
            let mut v = Via::new(format!("v{k}"), at);
            v.radius = rng.gen_range(0.3..1.0);
            b.vias.push(v);
        }
    }
    for k in 0..rng.gen_range(0..3) {
        let at = *sites.choose(&mut rng).unwrap();
        if planar.distance_to_boundary(frame.position(at)) < 1.5 || !used.insert(at) {
            continue;
        }
        let layer = if rng.gen_bool(0.5) {
            Layer::Top
        } else {
            Layer::Bottom
        };
        let mut s = Socket::new(format!("s{k}"), at, layer);
        s.radius = rng.gen_range(0.6..1.05);
        s.depth = rng.gen_range(2.0..3.0);
        b.sockets.push(s);
    }

    let nb = rng.gen_range(0..3);
    for k in 0..nb {
        // Parallel axes in separate bands of the board; strips stay apart.
        let x = w * (k as f64 + rng.gen_range(0.3..0.7)) / nb as f64;
        b.bends.push(BendLine {
            id: format!("b{k}"),
            from: Point2::new(x, -1.0),
            to: Point2::new(x, h + 1.0),
            angle: rng.gen_range(-90.0..90.0),
            radius: rng.gen_range(2.0..3.5),
            sequence: (nb - k) as i64,
        });
    }
    for k in 0..rng.gen_range(0..3) {
        b.flex_zones.push(FlexZone {
            id: format!("f{k}"),
            center: Point2::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h)),
            radius: rng.gen_range(1.0..8.0),
            expected_deflection: rng.gen_range(0.0..30.0),
            direction: rng.gen_bool(0.5).then(|| rng.gen_range(-180.0..180.0)),
        });
    }

    let errs = validate_design(&b);
    assert!(
        errs.is_empty(),
        "generator produced an invalid board (seed {seed}): {errs:?}"
    );
    b
}

const VOCAB: &[&str] = &[
    "board",
    "{",
    "}",
    ";",
    "outline",
    "rect",
    "polygon",
    "pitch",
    "margin",
    "stackup",
    "trace",
    "via",
    "socket",
    "bend",
    "flex",
    "layer",
    "top",
    "bottom",
    "path",
    "width",
    "height",
    "plated",
    "true",
    "false",
    "current",
    "at",
    "radius",
    "depth",
    "axis",
    "angle",
    "sequence",
    "center",
    "deflection",
    "direction",
    "name",
    "\"x\"",
    "(0,0)",
    "(3,0)",
    "(1,2)",
    "(-1,5)",
    "0.3",
    "60",
    "40",
    "2.54",
    "-7",
    "1e309",
    "nan",
    "#",
    "\n",
    " ",
    "(",
    ")",
    ",",
];

fn mutate(rng: &mut ChaCha8Rng, base: &[u8]) -> Vec<u8> {
    let mut v = base.to_vec();
    for _ in 0..rng.gen_range(1..8) {
        if v.is_empty() {
            v.push(rng.gen());
            continue;
        }
        let i = rng.gen_range(0..v.len());
        match rng.gen_range(0..5) {
            0 => v[i] = rng.gen(),
            1 => {
                v.remove(i);
            }
            2 => v.insert(i, rng.gen()),
            3 => v.truncate(i),
            _ => {
                let j = rng.gen_range(0..v.len());
                let (a, b) = (i.min(j), i.max(j));
                let chunk = v[a..b].to_vec();
                let k = rng.gen_range(0..=v.len());
                v.splice(k..k, chunk);
            }
        }
    }
    v
}

/// Arbitrary input of three kinds: raw bytes, mutated sample documents and
/// keyword soup. The parser must return in bounded time without panicking.
pub fn fuzz_inputs(n: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| match i % 3 {
            0 => (0..rng.gen_range(0..300)).map(|_| rng.gen()).collect(),
            1 => {
                let base = if rng.gen_bool(0.5) {
                    LED_SAMPLE
                } else {
                    HOTWIRE_SAMPLE
                };
                mutate(&mut rng, base.as_bytes())
            }
            _ => {
                let mut s = String::new();
                for _ in 0..rng.gen_range(0..120) {
                    s.push_str(VOCAB.choose(&mut rng).unwrap());
                    s.push(' ');
                }
                s.into_bytes()
            }
        })
        .collect()
}
