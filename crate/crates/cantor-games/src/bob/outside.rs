//! Adapter that fields an allocator outside its game contract: declines
//! and honest dead ends are stripped, so an unmet demand is scored as a
//! plain loss instead of an excused pass. Used to test adversaries
//! against allocators whose preconditions the adversary violates.

use crate::game::state::AllocationState;
use crate::game::{BobMove, BobReplyKind, BobStrategy, GameConfig, Key, Metrics, Request};
use crate::interval::CantorAddress;

pub struct OutsideContract<B> {
    inner: B,
}

pub fn outside_contract<B: BobStrategy>(inner: B) -> OutsideContract<B> {
    OutsideContract { inner }
}

impl<B: BobStrategy> BobStrategy for OutsideContract<B> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn setup(&mut self, cfg: &GameConfig) -> Vec<(Key, CantorAddress)> {
        self.inner.setup(cfg)
    }

    fn respond(&mut self, cfg: &GameConfig, state: &AllocationState, req: &Request) -> BobMove {
        let mv = self.inner.respond(cfg, state, req);
        match &mv.kind {
            BobReplyKind::Granted => mv,
            BobReplyKind::Declined => {
                let mut empty = BobMove::grant(Vec::new());
                empty.note = Some("decline voided outside the contract".into());
                empty
            }
            // promise accusations rest on the waived preconditions, so
            // they are voided along with honest dead ends
            BobReplyKind::DeadEnd { what, .. } => {
                let mut empty = BobMove::grant(Vec::new());
                empty.note = Some(format!("dead end voided outside the contract: {what}"));
                empty
            }
        }
    }

    fn may_decline(&self) -> bool {
        false
    }

    fn finish(&self, metrics: &mut Metrics) {
        self.inner.finish(metrics)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;
    use crate::game::{run_match, GameConfig, Mode, Outcome, ScriptedAlice};

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    struct AlwaysDeclines;

    impl BobStrategy for AlwaysDeclines {
        fn name(&self) -> &'static str {
            "always-declines"
        }

        fn respond(&mut self, _: &GameConfig, _: &AllocationState, _: &Request) -> BobMove {
            BobMove::decline(vec![crate::game::StrategyEvent::Excused {
                note: "not serving anything".into(),
            }])
        }

        fn may_decline(&self) -> bool {
            true
        }
    }

    #[test]
    fn voided_refusals_become_losses() {
        let cfg = GameConfig::pair(
            Mode::PairPrefixFree,
            dy("1/2^1"),
            dy("1/2^4"),
            vec![dy("1/2^4")],
        );
        let script = vec![Request { vertices: vec![0, 1], size: dy("1/2^4") }];
        let t = run_match(&cfg, &mut ScriptedAlice::new(script.clone()), &mut AlwaysDeclines, 10);
        assert!(matches!(t.outcome, Outcome::BobWinsScriptExhausted), "{:?}", t.outcome);

        let mut wrapped = outside_contract(AlwaysDeclines);
        let t = run_match(&cfg, &mut ScriptedAlice::new(script), &mut wrapped, 10);
        assert!(matches!(t.outcome, Outcome::AliceWins { .. }), "{:?}", t.outcome);
    }
}
