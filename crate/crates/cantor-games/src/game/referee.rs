//! The referee: drives the alternation between the two players, validates
//! every move and records the transcript.

use super::config::{GameConfig, Key, Mode, Request, Vertex, Violation};
use super::state::AllocationState;
use super::transcript::{Actor, Metrics, MoveKind, MoveRecord, Outcome, Transcript};
use crate::dyadic::Dyadic;
use crate::interval::CantorAddress;
use std::collections::BTreeSet;

/// Ledger declarations a Bob strategy can attach to a reply.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StrategyEvent {
    Blame { vertex: Vertex },
    Leaders { of: Vertex, leaders: Vec<Vertex> },
    Friends { a: Vertex, b: Vertex },
    /// The request needs no allocation (an earlier declaration excuses it).
    Excused { note: String },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BobReplyKind {
    /// Replies stand on their own; the demand check decides the rest.
    Granted,
    /// Legal refusal in blame-style game variants; must carry an event.
    Declined,
    /// The strategy cannot continue.
    DeadEnd { promise_violation: bool, what: String },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BobMove {
    pub allocations: Vec<(Key, CantorAddress)>,
    pub events: Vec<StrategyEvent>,
    pub kind: BobReplyKind,
    pub note: Option<String>,
}

impl BobMove {
    pub fn grant(allocations: Vec<(Key, CantorAddress)>) -> Self {
        BobMove { allocations, events: Vec::new(), kind: BobReplyKind::Granted, note: None }
    }

    pub fn decline(events: Vec<StrategyEvent>) -> Self {
        BobMove { allocations: Vec::new(), events, kind: BobReplyKind::Declined, note: None }
    }

    pub fn dead_end(promise_violation: bool, what: impl Into<String>) -> Self {
        BobMove {
            allocations: Vec::new(),
            events: Vec::new(),
            kind: BobReplyKind::DeadEnd { promise_violation, what: what.into() },
            note: None,
        }
    }
}

pub trait BobStrategy {
    fn name(&self) -> &'static str;

    /// Voluntary allocations made before any request.
    fn setup(&mut self, _cfg: &GameConfig) -> Vec<(Key, CantorAddress)> {
        Vec::new()
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove;

    /// Whether declining a request (with an excusing event) is within this
    /// strategy's game contract.
    fn may_decline(&self) -> bool {
        false
    }

    /// Ledger extremes for the metrics record.
    fn finish(&self, _metrics: &mut Metrics) {}
}

pub trait AliceStrategy {
    fn name(&self) -> &'static str;

    /// The next request, or `None` when the script is exhausted.
    fn next(&mut self, cfg: &GameConfig, state: &AllocationState) -> Option<Request>;

    fn finish(&self, _metrics: &mut Metrics) {}
}

/// Runs one match to completion or to the move bound.
pub fn run_match(
    cfg: &GameConfig,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
    max_moves: usize,
) -> Transcript {
    let mut state = AllocationState::new(cfg.mode);
    let mut moves: Vec<MoveRecord> = Vec::new();
    let mut metrics = Metrics::default();
    let mut touched: BTreeSet<Vertex> = BTreeSet::new();
    let mut idx = 0usize;
    let mut outcome: Option<Outcome> = None;

    for (key, addr) in bob.setup(cfg) {
        idx += 1;
        moves.push(allocate_record(idx, &key, &addr, Some("setup".into())));
        if let Err(Violation::Overlap { vertex }) = state.apply_reply(&key, &addr) {
            outcome = Some(Outcome::AliceWins {
                at_move: idx,
                reason: format!("overlap at vertex {vertex}"),
            });
            break;
        }
        metrics.allocations += 1;
    }

    let mut requests = 0usize;
    while outcome.is_none() {
        if requests >= max_moves {
            outcome = Some(Outcome::Undecided);
            break;
        }
        let Some(req) = alice.next(cfg, &state) else {
            outcome = Some(Outcome::BobWinsScriptExhausted);
            break;
        };
        requests += 1;
        idx += 1;
        let req_idx = idx;
        touched.extend(req.vertices.iter().copied());
        moves.push(MoveRecord {
            idx,
            actor: Actor::Alice,
            kind: MoveKind::Request,
            vertices: req.vertices.clone(),
            size: Some(req.size.clone()),
            address: None,
            note: None,
        });
        metrics.requests += 1;
        if let Err(v) = state.validate_request(cfg, &req) {
            outcome = Some(Outcome::RuleViolation {
                actor: Actor::Alice,
                at_move: req_idx,
                rule: v.to_string(),
            });
            break;
        }
        state.charge_request(cfg, &req);

        let reply = bob.respond(cfg, &state, &req);
        for (key, addr) in &reply.allocations {
            idx += 1;
            moves.push(allocate_record(idx, key, addr, reply.note.clone()));
            if let Err(Violation::Overlap { vertex }) = state.apply_reply(key, addr) {
                outcome = Some(Outcome::AliceWins {
                    at_move: idx,
                    reason: format!("overlap at vertex {vertex}"),
                });
                break;
            }
            metrics.allocations += 1;
        }
        if outcome.is_some() {
            break;
        }
        let mut excusing_event = false;
        let mut pass_note: Option<String> = None;
        for ev in &reply.events {
            excusing_event = true;
            if let StrategyEvent::Excused { note } = ev {
                pass_note = Some(note.clone());
                continue;
            }
            idx += 1;
            moves.push(event_record(idx, ev, &mut metrics));
        }

        if let BobReplyKind::DeadEnd { promise_violation, what } = &reply.kind {
            outcome = Some(if *promise_violation {
                Outcome::RuleViolation {
                    actor: Actor::Alice,
                    at_move: req_idx,
                    rule: what.clone(),
                }
            } else {
                Outcome::Falsification { at_move: req_idx, what: what.clone() }
            });
            break;
        }

        let key = req.key(cfg.mode);
        let met = match cfg.mode {
            Mode::PairPrefixFree | Mode::Set => state.consume_grant(&key, &req.size),
            Mode::PairPrefixStable | Mode::PairBipartite => {
                state.table(&key).nu() >= &cfg.c * &state.weight(&key)
            }
        };
        if !met {
            if bob.may_decline() && excusing_event {
                metrics.passed += 1;
                idx += 1;
                moves.push(MoveRecord {
                    idx,
                    actor: Actor::Bob,
                    kind: MoveKind::Pass,
                    vertices: req.vertices.clone(),
                    size: Some(req.size.clone()),
                    address: None,
                    note: pass_note,
                });
            } else {
                outcome = Some(Outcome::AliceWins {
                    at_move: req_idx,
                    reason: format!("demand for {key:?} of size {} not met", req.size),
                });
            }
        }
    }

    metrics.moves = idx;
    metrics.vertices_touched = touched.len() as u64;
    metrics.ball_count_ok = state.ball_count_check(&Dyadic::one()).is_ok();
    alice.finish(&mut metrics);
    bob.finish(&mut metrics);
    Transcript {
        config: cfg.clone(),
        moves,
        outcome: outcome.expect("loop always sets an outcome"),
        metrics,
    }
}

fn allocate_record(idx: usize, key: &Key, addr: &CantorAddress, note: Option<String>) -> MoveRecord {
    MoveRecord {
        idx,
        actor: Actor::Bob,
        kind: MoveKind::Allocate,
        vertices: key.vertices().to_vec(),
        size: Some(addr.size()),
        address: Some(addr.clone()),
        note,
    }
}

fn event_record(idx: usize, ev: &StrategyEvent, metrics: &mut Metrics) -> MoveRecord {
    let (kind, vertices, note) = match ev {
        StrategyEvent::Blame { vertex } => {
            metrics.blames += 1;
            (MoveKind::Blame, vec![*vertex], None)
        }
        StrategyEvent::Leaders { of, leaders } => {
            metrics.leaders += leaders.len() as u64;
            let mut vs = vec![*of];
            vs.extend(leaders);
            (MoveKind::Leader, vs, Some(format!("leaders of {of}")))
        }
        StrategyEvent::Friends { a, b } => {
            metrics.friends += 1;
            (MoveKind::Friend, vec![*a, *b], None)
        }
        StrategyEvent::Excused { .. } => unreachable!("handled by the caller"),
    };
    MoveRecord {
        idx,
        actor: Actor::Bob,
        kind,
        vertices,
        size: None,
        address: None,
        note,
    }
}

/// Replays a scripted request list; handy for tests and fixtures.
pub struct ScriptedAlice {
    script: std::vec::IntoIter<Request>,
}

impl ScriptedAlice {
    pub fn new(script: Vec<Request>) -> Self {
        ScriptedAlice { script: script.into_iter() }
    }
}

impl AliceStrategy for ScriptedAlice {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn next(&mut self, _cfg: &GameConfig, _state: &AllocationState) -> Option<Request> {
        self.script.next()
    }
}
