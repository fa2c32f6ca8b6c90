//! Referee state machine.
//!
//! Tasks are encoded as sequences of named states; transitions are triggered
//! by ball contact events. The complete set of `(state, event) -> next_state`
//! triplets lives in the environment config, and any pair not enumerated
//! there falls through to the default losing state.

use crate::Vec3;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Contact events that drive the state machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    /// Ball contact with the robot side of the table.
    TableArm,
    /// Ball contact with the opponent side of the table.
    TableOpp,
    /// Ball contact with the robot paddle.
    PaddleArm,
    /// Ball contact with the net.
    Net,
    /// Ball contact with the ground.
    Ground,
    /// Robot contact with the table.
    Table,
    /// Robot contact with the stand.
    Stand,
    /// Ball launch (episode start marker; logged, never routed to the
    /// state machine).
    Launch,
}

pub const CONTACT_EVENT_KINDS: [EventKind; 7] = [
    EventKind::TableArm,
    EventKind::TableOpp,
    EventKind::PaddleArm,
    EventKind::Net,
    EventKind::Ground,
    EventKind::Table,
    EventKind::Stand,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub kind: EventKind,
    pub time: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    WinPoint,
    LosePoint,
}

/// Declarative state machine description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMachineSpec {
    pub states: Vec<String>,
    pub initial: String,
    /// `(state, event) -> next_state` triplets.
    pub transitions: Vec<(String, EventKind, String)>,
    /// Terminal states and their outcomes.
    pub terminal: BTreeMap<String, Outcome>,
    /// State any unmapped `(state, event)` pair falls through to.
    pub default_lose: String,
}

impl StateMachineSpec {
    /// The ball-return task: launch, bounce on the robot side, paddle hit,
    /// then land on the opponent side (optionally clipping the net).
    pub fn ball_return() -> Self {
        use EventKind::*;
        let s = |n: &str| n.to_string();
        let mut terminal = BTreeMap::new();
        terminal.insert(s("DONE_P1_WINPOINT"), Outcome::WinPoint);
        terminal.insert(s("DONE_P1_LOSEPOINT"), Outcome::LosePoint);
        let mut transitions = vec![
            (s("P1_LAUNCH"), TableArm, s("P1_TABLE")),
            (s("P1_TABLE"), PaddleArm, s("P1_PADDLE")),
            (s("P1_PADDLE"), TableOpp, s("P2_TABLE")),
            (s("P1_PADDLE"), Net, s("P1_NET")),
            (s("P1_NET"), TableOpp, s("P2_TABLE")),
        ];
        // Once the return has landed the point is won, whatever happens next.
        for kind in CONTACT_EVENT_KINDS {
            transitions.push((s("P2_TABLE"), kind, s("DONE_P1_WINPOINT")));
        }
        Self {
            states: vec![
                s("P1_LAUNCH"),
                s("P1_TABLE"),
                s("P1_PADDLE"),
                s("P1_NET"),
                s("P2_TABLE"),
                s("DONE_P1_WINPOINT"),
                s("DONE_P1_LOSEPOINT"),
            ],
            initial: s("P1_LAUNCH"),
            transitions,
            terminal,
            default_lose: s("DONE_P1_LOSEPOINT"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StateMachineError {
    #[error("state `{0}` referenced but not declared")]
    UndeclaredState(String),
    #[error("transition from terminal state `{0}`")]
    TransitionFromTerminal(String),
}

/// Index-based compiled form of [`StateMachineSpec`].
#[derive(Debug, Clone)]
pub struct StateMachine {
    names: Vec<String>,
    table: HashMap<(usize, EventKind), usize>,
    terminal: Vec<Option<Outcome>>,
    initial: usize,
    default_lose: usize,
}

impl StateMachine {
    pub fn compile(spec: &StateMachineSpec) -> Result<Self, StateMachineError> {
        let index: HashMap<&str, usize> =
            spec.states.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| StateMachineError::UndeclaredState(name.into()))
        };
        let mut table = HashMap::new();
        for (from, kind, to) in &spec.transitions {
            table.insert((lookup(from)?, *kind), lookup(to)?);
        }
        let mut terminal = vec![None; spec.states.len()];
        for (name, outcome) in &spec.terminal {
            terminal[lookup(name)?] = Some(*outcome);
        }
        Ok(Self {
            names: spec.states.clone(),
            table,
            terminal,
            initial: lookup(&spec.initial)?,
            default_lose: lookup(&spec.default_lose)?,
        })
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn outcome(&self, state: usize) -> Option<Outcome> {
        self.terminal[state]
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state].is_some()
    }

    /// Advance on one event. Unmapped pairs fall through to the default
    /// losing state; transitions out of terminal states are an error.
    pub fn transition(&self, current: usize, event: EventKind) -> Result<usize, StateMachineError> {
        if self.is_terminal(current) {
            return Err(StateMachineError::TransitionFromTerminal(self.names[current].clone()));
        }
        Ok(self.table.get(&(current, event)).copied().unwrap_or(self.default_lose))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn machine() -> StateMachine {
        StateMachine::compile(&StateMachineSpec::ball_return()).unwrap()
    }

    #[test]
    fn launch_bounce_goes_to_p1_table() {
        let sm = machine();
        let s = sm.transition(sm.initial(), EventKind::TableArm).unwrap();
        assert_eq!(sm.name(s), "P1_TABLE");
    }

    #[test]
    fn net_clip_return_reaches_winpoint() {
        let sm = machine();
        let mut s = sm.initial();
        for ev in [EventKind::TableArm, EventKind::PaddleArm, EventKind::Net, EventKind::TableOpp] {
            s = sm.transition(s, ev).unwrap();
        }
        assert_eq!(sm.name(s), "P2_TABLE");
        s = sm.transition(s, EventKind::Ground).unwrap();
        assert_eq!(sm.outcome(s), Some(Outcome::WinPoint));
    }

    #[test]
    fn ground_from_launch_loses() {
        let sm = machine();
        let s = sm.transition(sm.initial(), EventKind::Ground).unwrap();
        assert_eq!(sm.name(s), "DONE_P1_LOSEPOINT");
        assert_eq!(sm.outcome(s), Some(Outcome::LosePoint));
    }

    #[test]
    fn totality_over_all_events_and_states() {
        let sm = machine();
        let spec = StateMachineSpec::ball_return();
        for (i, name) in spec.states.iter().enumerate() {
            if sm.is_terminal(i) {
                continue;
            }
            for kind in CONTACT_EVENT_KINDS {
                let next = sm.transition(i, kind).unwrap();
                assert!(next < spec.states.len(), "{name} x {kind:?} left the machine");
            }
        }
    }

    #[test]
    fn terminal_transitions_error() {
        let sm = machine();
        let done = sm.state_index("DONE_P1_WINPOINT").unwrap();
        assert!(matches!(
            sm.transition(done, EventKind::Ground),
            Err(StateMachineError::TransitionFromTerminal(_))
        ));
    }

    #[test]
    fn undeclared_states_are_rejected() {
        let mut spec = StateMachineSpec::ball_return();
        spec.transitions.push(("P1_LAUNCH".into(), EventKind::Net, "NOWHERE".into()));
        assert!(matches!(StateMachine::compile(&spec), Err(StateMachineError::UndeclaredState(_))));
    }
}
