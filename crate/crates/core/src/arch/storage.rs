use serde::{Deserialize, Serialize};

use crate::bits::{encode_ic, EncodedIc, EncodedSpin};
use crate::ising::{Couplings, IsingGraph, Spin};

/// Everything one spin needs to compute its local field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinTuple {
    pub owner: usize,
    pub neighbor_ids: Vec<usize>,
    pub neighbor_spins: Vec<EncodedSpin>,
    pub ics: Vec<EncodedIc>,
    pub field: i64,
}

impl SpinTuple {
    pub fn degree(&self) -> usize {
        self.neighbor_ids.len()
    }

    fn position(&self, j: usize) -> Option<usize> {
        self.neighbor_ids.binary_search(&j).ok()
    }
}

/// The graph image held in the last-level storage: one tuple per spin, with
/// every edge stored in both endpoint tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageArray {
    tuples: Vec<SpinTuple>,
    spins: Vec<Spin>,
    resolution: u32,
    capacity_bytes: usize,
    read_ports: usize,
}

/// Result of propagating flipped spins into the storage tuples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Writeback {
    pub flipped: Vec<usize>,
    /// Tuples that received at least one new neighbor spin, ascending.
    pub touched_tuples: Vec<usize>,
    pub entries_written: usize,
}

pub fn id_bits(num_spins: usize) -> u32 {
    if num_spins <= 2 {
        1
    } else {
        usize::BITS - (num_spins - 1).leading_zeros()
    }
}

impl StorageArray {
    pub fn build(graph: &IsingGraph, capacity_bytes: usize, read_ports: usize) -> Self {
        let r = graph.resolution();
        let spins = graph.spins().to_vec();
        let tuples = (0..graph.num_spins())
            .map(|i| {
                let nb = graph.neighbors(i);
                SpinTuple {
                    owner: i,
                    neighbor_ids: nb.iter().map(|&(j, _)| j).collect(),
                    neighbor_spins: nb.iter().map(|&(j, _)| EncodedSpin::encode(spins[j])).collect(),
                    ics: nb
                        .iter()
                        .map(|&(_, w)| encode_ic(w, r).expect("graph weights fit R bits"))
                        .collect(),
                    field: graph.fields()[i],
                }
            })
            .collect();
        Self {
            tuples,
            spins,
            resolution: r,
            capacity_bytes,
            read_ports,
        }
    }

    pub fn tuples(&self) -> &[SpinTuple] {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> &SpinTuple {
        &self.tuples[i]
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn num_spins(&self) -> usize {
        self.tuples.len()
    }

    pub fn read_ports(&self) -> usize {
        self.read_ports
    }

    pub fn capacity_bytes(&self) -> usize {
        self.capacity_bytes
    }

    pub fn num_entries(&self) -> usize {
        self.tuples.iter().map(SpinTuple::degree).sum()
    }

    /// Adjacency lookup, `adjacent(i, j) == adjacent(j, i)`.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.tuples.get(i).is_some_and(|t| t.position(j).is_some())
    }

    /// Size of the dense adjacency bit matrix.
    pub fn adjacency_bits(&self) -> u64 {
        let n = self.num_spins() as u64;
        n * n
    }

    /// Serialized tuple size: per entry an IC, a spin bit and a neighbor id,
    /// plus the field.
    pub fn tuple_bits(&self) -> u64 {
        let per_entry = (self.resolution + 1 + id_bits(self.num_spins())) as u64;
        self.num_entries() as u64 * per_entry + self.num_spins() as u64 * self.resolution as u64
    }

    /// Bits transferred when the problem is loaded: ICs with spin bits, and
    /// the fields. Ids and adjacency are regenerated on chip.
    pub fn payload_bits(&self) -> u64 {
        let r = self.resolution as u64;
        self.num_entries() as u64 * (r + 1) + self.num_spins() as u64 * r
    }

    pub fn overflow(&self) -> bool {
        self.tuple_bits() > self.capacity_bytes as u64 * 8
    }

    /// Number of storage-sized chunks the tuples span.
    pub fn chunks(&self) -> u64 {
        let cap = (self.capacity_bytes as u64 * 8).max(1);
        self.tuple_bits().div_ceil(cap).max(1)
    }

    /// Commits a new spin state, updating the neighbor-spin fields of every
    /// tuple adjacent to a flipped spin.
    pub fn write_back(&mut self, spins: &[Spin]) -> Writeback {
        assert_eq!(spins.len(), self.spins.len(), "spin count mismatch");
        let mut out = Writeback::default();
        let mut touched = vec![false; spins.len()];
        for j in 0..spins.len() {
            if spins[j] == self.spins[j] {
                continue;
            }
            out.flipped.push(j);
            let enc = EncodedSpin::encode(spins[j]);
            for k in 0..self.tuples[j].degree() {
                let i = self.tuples[j].neighbor_ids[k];
                let t = &mut self.tuples[i];
                let pos = t.position(j).expect("tuple-rep keeps both endpoints");
                t.neighbor_spins[pos] = enc;
                touched[i] = true;
                out.entries_written += 1;
            }
        }
        self.spins.copy_from_slice(spins);
        out.touched_tuples = (0..touched.len()).filter(|&i| touched[i]).collect();
        out
    }

    /// Recomputes, from the tuples alone, whether every stored neighbor spin
    /// matches the committed state.
    pub fn is_consistent(&self) -> bool {
        self.tuples.iter().all(|t| {
            t.neighbor_ids
                .iter()
                .zip(&t.neighbor_spins)
                .all(|(&j, s)| s.decode() == self.spins[j])
        })
    }

    /// `H = -(sum_i s_i sum_j J_ij s_j) / 2 - sum_i h_i s_i` from the tuples.
    pub fn hamiltonian(&self, spins: &[Spin]) -> i64 {
        let mut pair = 0i64;
        let mut field = 0i64;
        for t in &self.tuples {
            let si = spins[t.owner].value();
            let acc: i64 = t
                .neighbor_ids
                .iter()
                .zip(&t.ics)
                .map(|(&j, ic)| ic.decode() * spins[j].value())
                .sum();
            pair += si * acc;
            field += t.field * si;
        }
        -(pair / 2) - field
    }
}

impl Couplings for StorageArray {
    fn num_spins(&self) -> usize {
        self.tuples.len()
    }

    fn field(&self, i: usize) -> i64 {
        self.tuples[i].field
    }

    fn for_each_neighbor<F: FnMut(usize, i64)>(&self, i: usize, mut f: F) {
        let t = &self.tuples[i];
        for (&j, ic) in t.neighbor_ids.iter().zip(&t.ics) {
            f(j, ic.decode());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::{kings_graph, random_graph, CouplingSource};

    #[test]
    fn tuple_rep_on_pair() {
        let g = IsingGraph::with_edges(2, 4, [(0, 1, 1)]).unwrap();
        let s = StorageArray::build(&g, 160 * 1024, 2);
        assert_eq!(s.tuple(0).ics[0].decode(), 1);
        assert_eq!(s.tuple(1).ics[0].decode(), 1);
        assert!(s.adjacent(0, 1) && s.adjacent(1, 0) && !s.adjacent(0, 0));
    }

    #[test]
    fn kings_degrees() {
        let g = kings_graph(3, 3, 4, CouplingSource::Uniform(1)).unwrap();
        let s = StorageArray::build(&g, 160 * 1024, 2);
        let deg: Vec<usize> = s.tuples().iter().map(SpinTuple::degree).collect();
        assert_eq!(deg, vec![3, 5, 3, 5, 8, 5, 3, 5, 3]);
    }

    #[test]
    fn every_edge_in_two_tuples() {
        let g = random_graph(40, 6, 0.2, 2);
        let s = StorageArray::build(&g, 160 * 1024, 2);
        assert_eq!(s.num_entries(), 2 * g.num_edges());
        for e in g.edges() {
            assert!(s.adjacent(e.i, e.j) && s.adjacent(e.j, e.i));
        }
    }

    #[test]
    fn complete_graph_overflows() {
        let edges = (0..1000).flat_map(|i| (i + 1..1000).map(move |j| (i, j, 1)));
        let g = IsingGraph::with_edges(1000, 8, edges).unwrap();
        let s = StorageArray::build(&g, 160 * 1024, 2);
        assert!(s.overflow());
        assert!(s.chunks() > 1);
    }

    #[test]
    fn writeback_touches_only_neighbors() {
        let mut g = random_graph(30, 4, 0.15, 7);
        g.randomize_spins(1);
        let mut s = StorageArray::build(&g, 160 * 1024, 2);
        let mut next = g.spins().to_vec();
        next[3] = -next[3];
        next[17] = -next[17];
        let wb = s.write_back(&next);
        assert!(s.is_consistent());
        let mut expect: Vec<usize> = g
            .neighbors(3)
            .iter()
            .chain(g.neighbors(17))
            .map(|&(j, _)| j)
            .collect();
        expect.sort_unstable();
        expect.dedup();
        assert_eq!(wb.touched_tuples, expect);
        assert_eq!(wb.entries_written, g.degree(3) + g.degree(17));
        assert_eq!(s.hamiltonian(&next), g.hamiltonian_with(&next));
    }

    #[test]
    fn id_widths() {
        assert_eq!(id_bits(1), 1);
        assert_eq!(id_bits(2), 1);
        assert_eq!(id_bits(3), 2);
        assert_eq!(id_bits(100), 7);
        assert_eq!(id_bits(1024), 10);
        assert_eq!(id_bits(1025), 11);
    }
}
