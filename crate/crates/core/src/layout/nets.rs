use super::{BoardDesign, Layer, Trace};
use crate::geometry::GridIndex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Electrically connected set of conductive element ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub id: String,
    pub members: BTreeSet<String>,
}

/// Every lattice site a trace passes over, in path order (joints not repeated).
pub fn lattice_points(trace: &Trace) -> Vec<GridIndex> {
    let mut out = Vec::new();
    for (k, w) in trace.path.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let du = b.u - a.u;
        let dv = b.v - a.v;
        let g = gcd(du.unsigned_abs(), dv.unsigned_abs()).max(1) as i64;
        let (su, sv) = (du / g, dv / g);
        let start = if k == 0 { 0 } else { 1 };
        for i in start..=g {
            out.push(GridIndex::new(a.u + su * i, a.v + sv * i));
        }
    }
    if out.is_empty() {
        out.extend(trace.path.iter().copied());
    }
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Partitions traces, vias and sockets into nets. Traces join where they share
/// a lattice site on the same layer; a via joins both layers at its site; a
/// socket joins its own layer. Nets are ordered by smallest member id.
pub fn derive_nets(board: &BoardDesign) -> Vec<Net> {
    let mut ids: Vec<&str> = Vec::new();
    let mut sites: HashMap<(Layer, GridIndex), Vec<usize>> = HashMap::new();
    for t in &board.traces {
        let k = ids.len();
        ids.push(&t.id);
        for p in lattice_points(t) {
            sites.entry((t.layer, p)).or_default().push(k);
        }
    }
    for v in &board.vias {
        let k = ids.len();
        ids.push(&v.id);
        for l in Layer::ALL {
            sites.entry((l, v.at)).or_default().push(k);
        }
    }
    for s in &board.sockets {
        let k = ids.len();
        ids.push(&s.id);
        sites.entry((s.layer, s.at)).or_default().push(k);
    }
    let mut uf = UnionFind((0..ids.len()).collect());
    for members in sites.values() {
        for w in members.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (k, id) in ids.iter().enumerate() {
        let r = uf.find(k);
        groups.entry(r).or_default().insert(id.to_string());
    }
    let mut sets: Vec<BTreeSet<String>> = groups.into_values().collect();
    sets.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    sets.into_iter()
        .enumerate()
        .map(|(i, members)| Net {
            id: format!("net{}", i + 1),
            members,
        })
        .collect()
}

/// Net position of each conductive element id (ids are board-unique).
pub fn net_index(nets: &[Net]) -> HashMap<String, usize> {
    nets.iter()
        .enumerate()
        .flat_map(|(i, n)| n.members.iter().map(move |m| (m.clone(), i)))
        .collect()
}

/// Flat centreline length in mm. Folding is isometric, so this is also the
/// formed length.
pub fn trace_length(trace: &Trace, board: &BoardDesign) -> f64 {
    trace
        .path
        .windows(2)
        .map(|w| {
            let du = (w[1].u - w[0].u) as f64;
            let dv = (w[1].v - w[0].v) as f64;
            du.hypot(dv) * board.pitch
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Stackup;
    use crate::layout::{Outline, Socket, Via};

    fn board() -> BoardDesign {
        BoardDesign::new(
            "b",
            Outline::Rect {
                width: 60.0,
                height: 40.0,
            },
            Stackup::uniform(0.3),
        )
    }

    fn g(u: i64, v: i64) -> GridIndex {
        GridIndex::new(u, v)
    }

    #[test]
    fn disjoint_traces_make_two_nets() {
        let mut b = board();
        b.traces
            .push(Trace::new("a", Layer::Top, vec![g(0, 0), g(3, 0)]));
        b.traces
            .push(Trace::new("b", Layer::Top, vec![g(0, 2), g(3, 2)]));
        assert_eq!(derive_nets(&b).len(), 2);
    }

    #[test]
    fn via_joins_layers() {
        let mut b = board();
        b.traces
            .push(Trace::new("a", Layer::Top, vec![g(0, 0), g(3, 0)]));
        b.traces
            .push(Trace::new("b", Layer::Bottom, vec![g(3, 0), g(3, 4)]));
        assert_eq!(derive_nets(&b).len(), 2);
        b.vias.push(Via::new("v", g(3, 0)));
        let nets = derive_nets(&b);
        assert_eq!(nets.len(), 1);
        assert_eq!(nets[0].members.len(), 3);
    }

    #[test]
    fn mid_segment_junction_connects() {
        let mut b = board();
        b.traces
            .push(Trace::new("a", Layer::Top, vec![g(0, 0), g(6, 0)]));
        b.traces
            .push(Trace::new("b", Layer::Top, vec![g(3, 0), g(3, 5)]));
        // Diagonal through (2,1) only at lattice sites (0,0),(2,1),(4,2).
        b.traces
            .push(Trace::new("c", Layer::Top, vec![g(10, 0), g(14, 2)]));
        b.traces
            .push(Trace::new("d", Layer::Top, vec![g(12, 1), g(12, 5)]));
        let nets = derive_nets(&b);
        assert_eq!(nets.len(), 2);
        assert_eq!(nets[1].members.iter().collect::<Vec<_>>(), ["c", "d"]);
    }

    #[test]
    fn socket_joins_its_layer_only() {
        let mut b = board();
        b.traces
            .push(Trace::new("a", Layer::Bottom, vec![g(0, 0), g(3, 0)]));
        b.sockets.push(Socket::new("s", g(0, 0), Layer::Top));
        assert_eq!(derive_nets(&b).len(), 2);
        b.sockets[0].layer = Layer::Bottom;
        assert_eq!(derive_nets(&b).len(), 1);
    }

    #[test]
    fn empty_board_has_no_nets() {
        assert!(derive_nets(&board()).is_empty());
    }

    #[test]
    fn lengths() {
        let mut b = board();
        b.pitch = 1.0;
        let t = Trace::new("l", Layer::Top, vec![g(0, 0), g(10, 0), g(10, 10)]);
        assert!((trace_length(&t, &b) - 20.0).abs() < 1e-12);
        b.pitch = 2.54;
        let t = Trace::new("s", Layer::Top, vec![g(0, 0), g(1, 0)]);
        assert!((trace_length(&t, &b) - 2.54).abs() < 1e-12);
    }
}
