//! The alternating fill/correct game and its training loop.
//!
//! An episode starts from the seed state and runs up to `rounds` rounds. Each
//! round is a fill phase (Player 1 adds columns chosen by UCB until it is
//! stuck or the fill budget is spent) followed, except in the last round, by
//! a correction (Player 2 deletes a sampled row set). The episode's result is
//! the largest state seen at the end of a fill phase.
//!
//! Every episode draws from two ChaCha streams seeded from
//! `(rng_seed, episode index, stream)`, so an episode is a pure function of
//! the learners it starts from and its index. That is what makes checkpoint
//! resume bit-exact.

use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corrector::{
    apply_correction, feature_len, row_features, CorrectionRecord, CorrectorPolicy, EpisodeRecord,
};
use crate::error::{Error, Result};
use crate::factor::FactorCache;
use crate::filler::{enumerate, ActionSpec, CandidateColumn, CandidatePool, EnumOptions, MembershipList, TailConstraint};
use crate::fingerprint::RowSignatures;
use crate::gram::GramState;
use crate::io::config::{RunConfig, SeedKind};
use crate::io::gram_file::{parse_gram, GramData};
use crate::io::vectors::parse_vectors;
use crate::io::{read_text, sniff_kind};
use crate::reassemble::{decompose_reassemble, AnalysisSpec};
use crate::refconfigs::{generate, ingest, known_optimum, Configuration, GeneratorId};
use crate::scalar::Scalar;
use crate::tolerance::Tolerances;
use crate::tree::SearchTree;

/// Dimensions whose kissing number is proven; exceeding it is a bug.
const PROVEN: [usize; 6] = [1, 2, 3, 4, 8, 24];

/// `‖diag(G)‖²`, which is the sphere count because the diagonal is all ones.
pub fn team_reward<S: Scalar>(state: &GramState<S>) -> usize {
    let m = state.count();
    let total = (0..m).fold(S::zero(), |acc, i| {
        let d = state.get(i, i);
        acc + d.clone() * d
    });
    let reward = total.to_f64().round() as usize;
    assert_eq!(reward, m, "diagonal must be all ones");
    reward
}

fn stream_seed(seed: u64, episode: u64, stream: u64) -> u64 {
    let mut z = seed ^ episode.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything an episode needs, resolved into scalar type `S`.
#[derive(Clone, Debug)]
pub struct Game<S: Scalar> {
    pub config: RunConfig,
    pub spec: ActionSpec<S>,
    pub seed: GramState<S>,
    pub protected: usize,
    pub tol: Tolerances,
    c1_f64: Vec<f64>,
}

fn parse_list<S: Scalar>(values: &[String]) -> Result<Vec<S>> {
    values.iter().map(|v| S::parse_scalar(v.trim())).collect()
}

fn configuration_gram<S: Scalar>(c: &Configuration) -> Result<GramState<S>> {
    match &c.exact_gram {
        Some(g) => g.try_convert(|v| Ok(S::from_rational(v))),
        None => c.float_gram().try_convert(|v| S::from_f64_checked(*v)),
    }
}

/// Seed state for a run configuration.
pub fn load_seed<S: Scalar>(config: &RunConfig) -> Result<GramState<S>> {
    let dim = config.game.dim;
    let seed = &config.seed;
    let state = match seed.kind {
        SeedKind::Scratch => return GramState::single(dim),
        SeedKind::Generator => {
            let id: GeneratorId = seed.generator.as_deref().unwrap_or_default().parse()?;
            configuration_gram(&generate(&id)?)?
        }
        SeedKind::File => {
            let path = seed.path.as_ref().expect("validated");
            let text = read_text(path)?;
            match sniff_kind(&text) {
                Some(crate::io::gram_file::KIND) => match parse_gram(&text)? {
                    GramData::Float(g) => g.try_convert(|v| S::from_f64_checked(*v))?,
                    GramData::Rational(g) => g.try_convert(|v| Ok(S::from_rational(v)))?,
                },
                _ => configuration_gram(&ingest(parse_vectors(&text)?)?)?,
            }
        }
    };
    let state = match seed.rows {
        Some(r) if r < state.count() => state.principal(&(0..r).collect::<Vec<_>>()),
        _ => state,
    };
    if state.dim() != dim {
        return Err(Error::InvalidSeed(format!(
            "seed has dimension {}, game has {dim}",
            state.dim()
        )));
    }
    if state.count() == 0 {
        return Err(Error::InvalidSeed("seed has no rows".into()));
    }
    Ok(state)
}

impl<S: Scalar> Game<S> {
    pub fn from_config(config: &RunConfig) -> Result<Self> {
        let seed = load_seed(config)?;
        Self::with_seed(config, seed)
    }

    pub fn with_seed(config: &RunConfig, seed: GramState<S>) -> Result<Self> {
        config.validate()?;
        if S::MODE != config.game.mode {
            return Err(Error::InvalidConfig(format!(
                "game mode {} does not match the arithmetic in use",
                config.game.mode.as_str()
            )));
        }
        let tol = config.tolerances;
        seed.validate(&tol)
            .map_err(|e| Error::InvalidSeed(e.to_string()))?;
        if seed.dim() != config.game.dim {
            return Err(Error::InvalidSeed("seed dimension differs from game.dim".into()));
        }
        let a = &config.action;
        let c1: Vec<S> = parse_list(&a.c1)?;
        let c2 = match (&a.c2, &a.c2_cap) {
            (Some(list), None) => TailConstraint::Discrete(parse_list(list)?),
            (None, Some(cap)) => TailConstraint::Cap(S::parse_scalar(cap.trim())?),
            _ => TailConstraint::Discrete(c1.clone()),
        };
        let mut spec = ActionSpec::new(c1, c2)?;
        if let Some(name) = &a.cstar {
            let allowed = generate(&name.parse()?)?.float_gram();
            spec = spec.with_predicate(Arc::new(MembershipList::from_gram(&allowed)));
        }
        let protected = if config.seed.protect { seed.count() } else { 0 };
        let c1_f64 = spec.c1().iter().map(Scalar::to_f64).collect();
        Ok(Self {
            config: config.clone(),
            spec,
            seed,
            protected,
            tol,
            c1_f64,
        })
    }

    pub fn initial_policy(&self) -> CorrectorPolicy {
        let c = &self.config.corrector;
        CorrectorPolicy {
            temperature: c.temperature,
            max_delete_fraction: c.max_delete_fraction,
            base_rate: c.base_rate,
            baseline_decay: c.baseline_decay,
            ..CorrectorPolicy::new(feature_len(self.c1_f64.len()), self.protected)
        }
    }

    pub fn initial_tree(&self) -> SearchTree {
        SearchTree::new(self.config.game.exploration)
    }

    fn enum_options(&self, track_conflicts: bool) -> EnumOptions {
        EnumOptions {
            cap: self.config.game.candidate_cap,
            track_conflicts,
            convention: self.config.game.norm_convention,
        }
    }
}

/// One entry of an episode's action log.
#[derive(Clone, Debug, PartialEq)]
pub enum Move {
    Add { round: usize, size: usize },
    Delete { round: usize, rows: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct EpisodeResult<S: Scalar> {
    pub final_state: GramState<S>,
    pub team_reward: usize,
    /// State size at the end of each fill phase.
    pub per_round_sizes: Vec<usize>,
    pub trajectory: Vec<Move>,
    /// Tree edges `(fingerprint(s), fingerprint(s'))` taken by Player 1.
    pub edges: Vec<(u64, u64)>,
    pub record: EpisodeRecord,
    pub wall_time: Duration,
}

struct Board<S: Scalar> {
    state: GramState<S>,
    cache: FactorCache<S>,
    ages: Vec<usize>,
    protected: usize,
}

impl<S: Scalar> Board<S> {
    fn add(&mut self, c: &CandidateColumn<S>, round: usize) -> Result<()> {
        self.cache = if c.rank_up {
            self.cache.appended_rank_up(&c.coords, c.schur.clone(), &c.full)
        } else {
            self.cache.appended_in_span(c.coords.clone())
        };
        self.state = self.state.extend(&c.full)?;
        self.ages.push(round + 1);
        Ok(())
    }
}

/// Plays one episode against fixed learners.
pub fn play_episode<S: Scalar>(
    game: &Game<S>,
    tree: &SearchTree,
    policy: &CorrectorPolicy,
    episode: u64,
) -> Result<EpisodeResult<S>> {
    let started = Instant::now();
    let cfg = &game.config.game;
    let tol = &game.tol;
    let mut fill_rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.rng_seed, episode, 0));
    let mut fix_rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.rng_seed, episode, 1));
    let mut board = Board {
        cache: FactorCache::pivoted(&game.seed, tol)?,
        state: game.seed.clone(),
        ages: vec![0; game.seed.count()],
        protected: game.protected,
    };
    let mut best = game.seed.clone();
    let mut sizes = Vec::new();
    let mut trajectory = Vec::new();
    let mut edges = Vec::new();
    let mut corrections = Vec::new();
    let mut stale_rounds = 0;
    let incremental = !game.spec.has_predicate();
    let reassemble = game.config.reassemble();

    for round in 0..cfg.rounds {
        // fill phase
        let mut added = 0usize;
        let mut pool = CandidatePool::enumerate(
            &board.state,
            &board.cache,
            &game.spec,
            tol,
            game.enum_options(false),
            &mut fill_rng,
        );
        while cfg.fill_budget.is_none_or(|b| added < b) {
            if pool.candidates.is_empty() {
                if pool.complete {
                    break;
                }
                pool = CandidatePool::enumerate(
                    &board.state,
                    &board.cache,
                    &game.spec,
                    tol,
                    game.enum_options(false),
                    &mut fill_rng,
                );
                if pool.candidates.is_empty() {
                    break;
                }
            }
            let mut offered: Vec<usize> = (0..pool.candidates.len()).collect();
            offered.shuffle(&mut fill_rng);
            if cfg.rollouts_per_move > 0 {
                offered.truncate(cfg.rollouts_per_move);
            }
            let sigs = RowSignatures::of(&board.state);
            let children: Vec<u64> = offered
                .iter()
                .map(|&i| sigs.child_hash(pool.candidates[i].full.iter().map(Scalar::quantize)))
                .collect();
            let pick = tree.select_action(sigs.hash(), &children)?;
            let chosen = pool.candidates[offered[pick]].clone();
            edges.push((sigs.hash(), children[pick]));
            let before = board.cache.clone();
            board.add(&chosen, round)?;
            if cfg.revalidate {
                board.state.validate(tol)?;
            }
            added += 1;
            trajectory.push(Move::Add {
                round,
                size: board.state.count(),
            });
            if chosen.rank_up || !incremental {
                pool = CandidatePool::enumerate(
                    &board.state,
                    &board.cache,
                    &game.spec,
                    tol,
                    game.enum_options(false),
                    &mut fill_rng,
                );
            } else {
                pool.retain_compatible(&chosen, &before, &game.spec, tol);
            }
        }
        let size = board.state.count();
        sizes.push(size);
        if let Some(opt) = known_optimum(cfg.dim).filter(|_| PROVEN.contains(&cfg.dim)) {
            if size > opt {
                return Err(Error::SoundnessViolation {
                    dim: cfg.dim,
                    reward: size,
                    optimum: opt,
                });
            }
        }
        if size > best.count() {
            best = board.state.clone();
            stale_rounds = 0;
        } else {
            stale_rounds += 1;
        }
        if round + 1 == cfg.rounds || stale_rounds >= cfg.stagnation_window {
            break;
        }

        // correction phase
        let mut deleted = Vec::new();
        if game.config.corrector.enabled && policy.delete_cap(size) > 0 {
            let conflicts = enumerate(
                &board.state,
                &board.cache,
                &game.spec,
                tol,
                game.enum_options(true),
                Some(&mut fix_rng),
            )
            .conflicts;
            let features: Vec<Vec<f64>> =
                row_features(&board.state, &game.c1_f64, &board.ages, &conflicts, tol.snap)
                    .iter()
                    .map(|f| f.vector())
                    .collect();
            let mut policy = policy.clone();
            policy.protected_prefix = board.protected;
            deleted = policy.sample_index_set(&features, &mut fix_rng);
            corrections.push(CorrectionRecord {
                features,
                sequence: deleted.clone(),
            });
        }
        if added == 0 && deleted.is_empty() {
            break;
        }
        if !deleted.is_empty() {
            board.state = apply_correction(&board.state, &deleted, board.protected)?;
            board.ages = (0..board.ages.len())
                .filter(|i| !deleted.contains(i))
                .map(|i| board.ages[i])
                .collect();
            trajectory.push(Move::Delete {
                round,
                rows: deleted,
            });
        }
        if reassemble {
            let r = decompose_reassemble(&board.state, board.protected, &AnalysisSpec::default(), tol.cosine_cap);
            board.ages = r.permutation.iter().map(|&i| board.ages[i]).collect();
            board.state = r.state;
            board.protected = r.protected;
        }
        board.cache = FactorCache::pivoted(&board.state, tol)?;
    }

    let team_reward = team_reward(&best);
    Ok(EpisodeResult {
        final_state: best,
        team_reward,
        per_round_sizes: sizes,
        trajectory,
        edges,
        record: EpisodeRecord {
            corrections,
            reward: team_reward as f64,
        },
        wall_time: started.elapsed(),
    })
}

/// Best configuration found so far.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResult<S: Scalar> {
    pub state: GramState<S>,
    pub reward: usize,
    pub episode: u64,
    pub per_round_sizes: Vec<usize>,
}

/// Resumable training state.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState<S: Scalar> {
    pub next_episode: u64,
    pub tree: SearchTree,
    pub policy: CorrectorPolicy,
    pub best: Option<BestResult<S>>,
    /// Best-ever reward after each episode.
    pub best_history: Vec<usize>,
}

impl<S: Scalar> TrainState<S> {
    pub fn new(game: &Game<S>) -> Self {
        Self {
            next_episode: 0,
            tree: game.initial_tree(),
            policy: game.initial_policy(),
            best: None,
            best_history: Vec::new(),
        }
    }

    pub fn best_reward(&self) -> usize {
        self.best.as_ref().map_or(0, |b| b.reward)
    }
}

/// Runs episodes until `game.config.game.episodes` have been played, the
/// target reward is reached, or `on_episode` breaks. `on_episode` sees the
/// state after every episode.
pub fn train_loop<S: Scalar>(
    game: &Game<S>,
    mut state: TrainState<S>,
    mut on_episode: impl FnMut(&TrainState<S>, &EpisodeResult<S>) -> Result<ControlFlow<()>>,
) -> Result<TrainState<S>> {
    let cfg = &game.config.game;
    let lr = game.config.corrector.learning_rate;
    while state.next_episode < cfg.episodes {
        if cfg.target.is_some_and(|t| state.best_reward() >= t) {
            break;
        }
        let episode = state.next_episode;
        let result = play_episode(game, &state.tree, &state.policy, episode)?;
        state.tree.backpropagate(&result.edges, result.team_reward as f64);
        if game.config.corrector.enabled {
            state.policy = state.policy.policy_gradient_update(std::slice::from_ref(&result.record), lr);
        }
        if result.team_reward > state.best_reward() {
            state.best = Some(BestResult {
                state: result.final_state.clone(),
                reward: result.team_reward,
                episode,
                per_round_sizes: result.per_round_sizes.clone(),
            });
        }
        state.best_history.push(state.best_reward());
        state.next_episode += 1;
        if on_episode(&state, &result)?.is_break() {
            break;
        }
    }
    Ok(state)
}
