//! Binary training checkpoints.
//!
//! Layout: the magic bytes `KISSCKPT`, a little-endian `u32` version, five
//! sections (config echo, cursor, tree, policy, best state), each a `u64`
//! byte length followed by its payload, and a trailing SHA-256 over all
//! preceding bytes. Floats are stored by bit pattern so a resumed run is
//! bit-identical to an uninterrupted one. Episode RNG streams are derived
//! from the seed and the episode index, so the cursor is the whole RNG state.

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use super::gram_file::{format_gram, parse_gram, GramData};
use crate::corrector::CorrectorPolicy;
use crate::error::{Error, Result};
use crate::game::{BestResult, TrainState};
use crate::gram::GramState;
use crate::scalar::Scalar;
use crate::tree::{EdgeStats, SearchTree};

pub const MAGIC: &[u8; 8] = b"KISSCKPT";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<S: Scalar> {
    /// Canonical echo of the run configuration.
    pub config_echo: String,
    pub rng_seed: u64,
    pub state: TrainState<S>,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptCheckpoint(msg.into())
}

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.write_u64::<LE>(v).expect("vec write");
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.0.extend_from_slice(b);
    }

    fn section(&mut self, body: Writer) {
        self.bytes(&body.0);
    }
}

struct Reader<'a>(Cursor<&'a [u8]>);

impl<'a> Reader<'a> {
    fn u8(&mut self) -> Result<u8> {
        self.0.read_u8().map_err(|_| corrupt("truncated data"))
    }

    fn u64(&mut self) -> Result<u64> {
        self.0.read_u64::<LE>().map_err(|_| corrupt("truncated data"))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("length out of range"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let len = self.usize()?;
        let start = self.0.position() as usize;
        let data = *self.0.get_ref();
        let end = start.checked_add(len).filter(|&e| e <= data.len()).ok_or_else(|| corrupt("section overruns the file"))?;
        self.0.set_position(end as u64);
        Ok(&data[start..end])
    }

    fn string(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| corrupt("invalid utf-8"))
    }

    fn finish(&self) -> Result<()> {
        if (self.0.position() as usize) == self.0.get_ref().len() {
            Ok(())
        } else {
            Err(corrupt("trailing bytes in section"))
        }
    }
}

fn write_list(w: &mut Writer, values: &[usize]) {
    w.u64(values.len() as u64);
    values.iter().for_each(|&v| w.u64(v as u64));
}

fn read_list(r: &mut Reader) -> Result<Vec<usize>> {
    let n = r.usize()?;
    (0..n).map(|_| r.usize()).collect()
}

fn gram_from_data<S: Scalar>(data: GramData) -> Result<GramState<S>> {
    match data {
        GramData::Float(g) => g.try_convert(|x| S::from_f64_checked(*x)),
        GramData::Rational(g) => g.try_convert(|r| Ok(S::from_rational(r))),
    }
}

pub fn encode<S: Scalar>(checkpoint: &Checkpoint<S>) -> Vec<u8> {
    let state = &checkpoint.state;
    let mut out = Writer(Vec::new());
    out.0.extend_from_slice(MAGIC);
    out.0.write_u32::<LE>(FORMAT_VERSION).expect("vec write");

    let mut config = Writer(Vec::new());
    config.0.extend_from_slice(checkpoint.config_echo.as_bytes());
    out.section(config);

    let mut cursor = Writer(Vec::new());
    cursor.u64(state.next_episode);
    cursor.u64(checkpoint.rng_seed);
    write_list(&mut cursor, &state.best_history);
    out.section(cursor);

    let mut tree = Writer(Vec::new());
    tree.f64(state.tree.exploration());
    tree.f64(state.tree.max_reward());
    let nodes: Vec<_> = state.tree.nodes().collect();
    tree.u64(nodes.len() as u64);
    for (&s, &n) in nodes {
        tree.u64(s);
        tree.u64(n);
    }
    tree.u64(state.tree.edge_count() as u64);
    for (&(s, c), e) in state.tree.edges() {
        tree.u64(s);
        tree.u64(c);
        tree.f64(e.q);
        tree.u64(e.visits);
    }
    out.section(tree);

    let p = &state.policy;
    let mut policy = Writer(Vec::new());
    policy.u64(p.weights.len() as u64);
    p.weights.iter().for_each(|&w| policy.f64(w));
    policy.f64(p.temperature);
    policy.f64(p.max_delete_fraction);
    policy.u64(p.protected_prefix as u64);
    policy.f64(p.base_rate);
    policy.f64(p.baseline);
    policy.u64(u64::from(p.baseline_initialized));
    policy.f64(p.baseline_decay);
    out.section(policy);

    let mut best = Writer(Vec::new());
    if let Some(b) = &state.best {
        best.0.push(1);
        best.u64(b.reward as u64);
        best.u64(b.episode);
        write_list(&mut best, &b.per_round_sizes);
        best.bytes(format_gram(&b.state).as_bytes());
    } else {
        best.0.push(0);
    }
    out.section(best);

    let digest = Sha256::digest(&out.0);
    out.0.extend_from_slice(&digest);
    out.0
}

pub fn decode<S: Scalar>(bytes: &[u8]) -> Result<Checkpoint<S>> {
    if bytes.len() < MAGIC.len() + 4 + DIGEST_LEN {
        return Err(corrupt("file too short"));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(corrupt("checksum mismatch"));
    }
    if &body[..MAGIC.len()] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let mut r = Reader(Cursor::new(body));
    r.0.set_position(MAGIC.len() as u64);
    let version = r.0.read_u32::<LE>().map_err(|_| corrupt("truncated data"))?;
    if version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }

    let config_echo = r.string()?;

    let mut cursor = Reader(Cursor::new(r.bytes()?));
    let next_episode = cursor.u64()?;
    let rng_seed = cursor.u64()?;
    let best_history = read_list(&mut cursor)?;
    cursor.finish()?;

    let mut t = Reader(Cursor::new(r.bytes()?));
    let exploration = t.f64()?;
    let max_reward = t.f64()?;
    let n_nodes = t.usize()?;
    let nodes = (0..n_nodes).map(|_| Ok((t.u64()?, t.u64()?))).collect::<Result<Vec<_>>>()?;
    let n_edges = t.usize()?;
    let edges = (0..n_edges)
        .map(|_| {
            let key = (t.u64()?, t.u64()?);
            Ok((key, EdgeStats { q: t.f64()?, visits: t.u64()? }))
        })
        .collect::<Result<Vec<_>>>()?;
    t.finish()?;
    let tree = SearchTree::from_parts(exploration, max_reward, nodes, edges);
    if !tree.is_consistent() {
        return Err(corrupt("tree visit counts are inconsistent"));
    }

    let mut p = Reader(Cursor::new(r.bytes()?));
    let n_weights = p.usize()?;
    let weights = (0..n_weights).map(|_| p.f64()).collect::<Result<Vec<_>>>()?;
    let policy = CorrectorPolicy {
        weights,
        temperature: p.f64()?,
        max_delete_fraction: p.f64()?,
        protected_prefix: p.usize()?,
        base_rate: p.f64()?,
        baseline: p.f64()?,
        baseline_initialized: p.u64()? != 0,
        baseline_decay: p.f64()?,
    };
    p.finish()?;

    let mut b = Reader(Cursor::new(r.bytes()?));
    let best = match b.u8()? {
        0 => None,
        1 => {
            let reward = b.usize()?;
            let episode = b.u64()?;
            let per_round_sizes = read_list(&mut b)?;
            let text = b.string()?;
            let state = gram_from_data(parse_gram(&text).map_err(|e| corrupt(e.to_string()))?)?;
            Some(BestResult { state, reward, episode, per_round_sizes })
        }
        flag => return Err(corrupt(format!("bad best-state flag {flag}"))),
    };
    b.finish()?;
    r.finish()?;

    Ok(Checkpoint {
        config_echo,
        rng_seed,
        state: TrainState { next_episode, tree, policy, best, best_history },
    })
}

pub fn write_checkpoint<S: Scalar>(path: &Path, checkpoint: &Checkpoint<S>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode(checkpoint))
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_checkpoint<S: Scalar>(path: &Path) -> Result<Checkpoint<S>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn sample() -> Checkpoint<Rational> {
        let tree = SearchTree::from_parts(
            1.5,
            6.0,
            [(1, 3), (7, 1)],
            [((1, 2), EdgeStats { q: 5.5, visits: 2 }), ((1, 4), EdgeStats { q: 0.1 + 0.2, visits: 1 }), ((7, 9), EdgeStats { q: 6.0, visits: 1 })],
        );
        let mut policy = CorrectorPolicy::new(7, 1);
        policy.weights = vec![0.1, -2.5, 1e-300, 0.0, 3.0, -0.0, 7.25];
        let hex = crate::refconfigs::hexagon().exact_gram.unwrap();
        Checkpoint {
            config_echo: "[game]\ndim = 2\n".into(),
            rng_seed: 42,
            state: TrainState {
                next_episode: 3,
                tree,
                policy,
                best: Some(BestResult { state: hex, reward: 6, episode: 2, per_round_sizes: vec![4, 6] }),
                best_history: vec![4, 6, 6],
            },
        }
    }

    #[test]
    fn round_trip() {
        let c = sample();
        let bytes = encode(&c);
        assert_eq!(decode::<Rational>(&bytes).unwrap(), c);
        assert_eq!(encode(&decode::<Rational>(&bytes).unwrap()), bytes);
    }

    #[test]
    fn detects_corruption() {
        let bytes = encode(&sample());
        for pos in [0, 10, bytes.len() / 2, bytes.len() - 1] {
            let mut bad = bytes.clone();
            bad[pos] ^= 0x40;
            assert!(matches!(decode::<Rational>(&bad), Err(Error::CorruptCheckpoint(_))));
        }
        assert!(matches!(decode::<Rational>(&bytes[..bytes.len() - 5]), Err(Error::CorruptCheckpoint(_))));
        assert!(matches!(decode::<Rational>(&[]), Err(Error::CorruptCheckpoint(_))));
    }

    #[test]
    fn float_best_state_survives() {
        let mut c: Checkpoint<f64> = Checkpoint {
            config_echo: String::new(),
            rng_seed: 0,
            state: TrainState {
                next_episode: 0,
                tree: SearchTree::default(),
                policy: CorrectorPolicy::new(3, 0),
                best: None,
                best_history: vec![],
            },
        };
        assert_eq!(decode::<f64>(&encode(&c)).unwrap(), c);
        let ico = crate::refconfigs::icosahedron().float_gram();
        c.state.best = Some(BestResult { state: ico, reward: 12, episode: 0, per_round_sizes: vec![12] });
        assert_eq!(decode::<f64>(&encode(&c)).unwrap(), c);
    }
}
