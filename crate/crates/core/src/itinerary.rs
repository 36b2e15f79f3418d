//! Per-MER itineraries and their span-by-span state labels.
//!
//! A label sequence has one entry per time point `0..=D`: the MER is either
//! parked at a node or traveling toward one. A leg covers its traveling spans
//! only, so `arrive_span - depart_span + 1` is the travel time for complete
//! legs; the MER is parked at the destination from `arrive_span + 1`.

use std::fmt;

use thiserror::Error;

use crate::scenario::TravelTimeMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpanState {
    Parked(usize),
    Traveling(usize),
}

impl SpanState {
    pub fn is_traveling(self) -> bool {
        matches!(self, SpanState::Traveling(_))
    }

    /// Key for lexicographic comparison: parking labels sort before traveling
    /// labels, then by node index.
    pub fn order_key(self) -> (u8, usize) {
        match self {
            SpanState::Parked(i) => (0, i),
            SpanState::Traveling(i) => (1, i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Leg {
    pub origin: usize,
    pub destination: usize,
    /// First traveling span.
    pub depart_span: u32,
    /// Last traveling span inside the horizon.
    pub arrive_span: u32,
}

impl Leg {
    pub fn spans(&self) -> u32 {
        self.arrive_span - self.depart_span + 1
    }

    /// True when the leg lasts its full travel time (not cut by the horizon).
    pub fn is_complete(&self, travel: &TravelTimeMatrix) -> bool {
        self.spans() == travel.get(self.origin, self.destination)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Park {
        node: usize,
        first_span: u32,
        last_span: u32,
    },
    Travel(Leg),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Itinerary {
    pub mer_id: u32,
    pub initial_node: usize,
    pub legs: Vec<Leg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ItineraryError {
    #[error("span {span}: {message}")]
    Labels { span: u32, message: String },
    #[error("leg {index}: {message}")]
    Leg { index: usize, message: String },
}

fn label_err(span: u32, message: impl Into<String>) -> ItineraryError {
    ItineraryError::Labels {
        span,
        message: message.into(),
    }
}

impl Itinerary {
    pub fn stationary(mer_id: u32, node: usize) -> Self {
        Itinerary {
            mer_id,
            initial_node: node,
            legs: Vec::new(),
        }
    }

    pub fn travel_spans(&self) -> u32 {
        self.legs.iter().map(Leg::spans).sum()
    }

    /// Checks ordering, chaining and durations against `travel` within a
    /// horizon of `num_spans` spans. Only the final leg may be truncated.
    pub fn validate(&self, travel: &TravelTimeMatrix, num_spans: u32) -> Result<(), ItineraryError> {
        let n = travel.len();
        if self.initial_node >= n {
            return Err(label_err(0, format!("initial node {} out of range", self.initial_node)));
        }
        let mut here = self.initial_node;
        // earliest span at which a departure is possible
        let mut earliest = 1u32;
        for (index, leg) in self.legs.iter().enumerate() {
            let bad = |message: String| ItineraryError::Leg { index, message };
            if leg.origin != here {
                return Err(bad(format!("starts at node {} but the MER is at {here}", leg.origin)));
            }
            if leg.destination >= n || leg.destination == leg.origin {
                return Err(bad(format!("invalid destination {}", leg.destination)));
            }
            if leg.depart_span < earliest {
                return Err(bad(format!(
                    "departs at span {} before the MER has parked (earliest {earliest})",
                    leg.depart_span
                )));
            }
            if leg.arrive_span < leg.depart_span || leg.arrive_span > num_spans {
                return Err(bad("arrival outside the horizon".into()));
            }
            let full = travel.get(leg.origin, leg.destination);
            let last = index + 1 == self.legs.len();
            if leg.spans() > full {
                return Err(bad(format!("lasts {} spans, travel time is {full}", leg.spans())));
            }
            if leg.spans() < full && !(last && leg.arrive_span == num_spans) {
                return Err(bad(format!(
                    "lasts {} spans but travel time is {full} and the horizon does not cut it",
                    leg.spans()
                )));
            }
            here = leg.destination;
            earliest = leg.arrive_span + 2;
        }
        Ok(())
    }

    /// Span labels for `0..=num_spans`. Assumes a valid itinerary.
    pub fn states(&self, num_spans: u32) -> Vec<SpanState> {
        let mut out = Vec::with_capacity(num_spans as usize + 1);
        let mut here = self.initial_node;
        let mut legs = self.legs.iter().peekable();
        let mut t = 0u32;
        while t <= num_spans {
            match legs.peek() {
                Some(leg) if leg.depart_span == t => {
                    for _ in leg.depart_span..=leg.arrive_span {
                        out.push(SpanState::Traveling(leg.destination));
                    }
                    t = leg.arrive_span + 1;
                    here = leg.destination;
                    legs.next();
                }
                _ => {
                    out.push(SpanState::Parked(here));
                    t += 1;
                }
            }
        }
        out
    }

    /// Inverse of [`Itinerary::states`]: rebuilds legs from labels. Fails on
    /// teleports, mid-travel direction changes, arrival at a node other than
    /// the destination, travel at span 0, or travel toward the current node.
    pub fn from_states(mer_id: u32, states: &[SpanState]) -> Result<Self, ItineraryError> {
        let Some(&first) = states.first() else {
            return Err(label_err(0, "empty label sequence"));
        };
        let SpanState::Parked(initial_node) = first else {
            return Err(label_err(0, "traveling at the initial span"));
        };
        let last_span = states.len() as u32 - 1;
        let mut here = initial_node;
        let mut legs = Vec::new();
        let mut open: Option<Leg> = None;
        for (t, &s) in states.iter().enumerate().skip(1) {
            let t = t as u32;
            match (s, open.as_mut()) {
                (SpanState::Parked(i), None) => {
                    if i != here {
                        return Err(label_err(t, format!("parking jumps from {here} to {i} without travel")));
                    }
                }
                (SpanState::Parked(i), Some(leg)) => {
                    if i != leg.destination {
                        return Err(label_err(
                            t,
                            format!("arrives at {i} while heading to {}", leg.destination),
                        ));
                    }
                    legs.push(*leg);
                    here = i;
                    open = None;
                }
                (SpanState::Traveling(k), None) => {
                    if k == here {
                        return Err(label_err(t, format!("travels toward its own position {k}")));
                    }
                    open = Some(Leg {
                        origin: here,
                        destination: k,
                        depart_span: t,
                        arrive_span: t,
                    });
                }
                (SpanState::Traveling(k), Some(leg)) => {
                    if k != leg.destination {
                        return Err(label_err(
                            t,
                            format!("changes direction from {} to {k} mid-travel", leg.destination),
                        ));
                    }
                    leg.arrive_span = t;
                }
            }
        }
        if let Some(mut leg) = open {
            leg.arrive_span = last_span;
            legs.push(leg);
        }
        Ok(Itinerary {
            mer_id,
            initial_node,
            legs,
        })
    }

    /// Parking intervals and legs covering every span `0..=num_spans` once.
    pub fn segments(&self, num_spans: u32) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut here = self.initial_node;
        let mut t = 0u32;
        for leg in &self.legs {
            if leg.depart_span > t {
                out.push(Segment::Park {
                    node: here,
                    first_span: t,
                    last_span: leg.depart_span - 1,
                });
            }
            out.push(Segment::Travel(*leg));
            here = leg.destination;
            t = leg.arrive_span + 1;
        }
        if t <= num_spans {
            out.push(Segment::Park {
                node: here,
                first_span: t,
                last_span: num_spans,
            });
        }
        out
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MER {}: start at node #{}", self.mer_id, self.initial_node)?;
        for leg in &self.legs {
            write!(
                f,
                "; #{} -> #{} spans {}..{}",
                leg.origin, leg.destination, leg.depart_span, leg.arrive_span
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SpanState::{Parked, Traveling};

    fn tt(rows: &[&[u32]]) -> TravelTimeMatrix {
        TravelTimeMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn stationary_is_a_single_parking_interval() {
        let it = Itinerary::stationary(1, 2);
        assert_eq!(
            it.segments(6),
            vec![Segment::Park {
                node: 2,
                first_span: 0,
                last_span: 6
            }]
        );
    }

    #[test]
    fn three_span_leg_labels() {
        // parked at 0 for spans 0..=1, traveling 2..=4, parked at 1 from 5
        let states = vec![
            Parked(0),
            Parked(0),
            Traveling(1),
            Traveling(1),
            Traveling(1),
            Parked(1),
            Parked(1),
        ];
        let it = Itinerary::from_states(7, &states).unwrap();
        assert_eq!(it.legs.len(), 1);
        let leg = it.legs[0];
        assert_eq!((leg.depart_span, leg.arrive_span), (2, 4));
        assert_eq!(leg.spans(), 3);
        assert_eq!(it.states(6), states);
        let t = tt(&[&[0, 3], &[3, 0]]);
        assert!(leg.is_complete(&t));
        it.validate(&t, 6).unwrap();
        assert_eq!(it.segments(6).len(), 3);
    }

    #[test]
    fn decoding_rejects_bad_labels() {
        assert!(Itinerary::from_states(1, &[Parked(0), Parked(1)]).is_err());
        assert!(Itinerary::from_states(1, &[Traveling(0)]).is_err());
        assert!(Itinerary::from_states(1, &[Parked(0), Traveling(1), Traveling(2)]).is_err());
        assert!(Itinerary::from_states(1, &[Parked(0), Traveling(1), Parked(2)]).is_err());
        assert!(Itinerary::from_states(1, &[Parked(0), Traveling(0)]).is_err());
    }

    #[test]
    fn truncated_final_leg_is_allowed() {
        let t = tt(&[&[0, 3], &[3, 0]]);
        let states = vec![Parked(0), Parked(0), Traveling(1), Traveling(1)];
        let it = Itinerary::from_states(1, &states).unwrap();
        assert!(!it.legs[0].is_complete(&t));
        it.validate(&t, 3).unwrap();
        assert_eq!(it.states(3), states);
    }

    #[test]
    fn validation_catches_short_and_chained_errors() {
        let t = tt(&[&[0, 3, 1], &[3, 0, 1], &[1, 1, 0]]);
        let short = Itinerary {
            mer_id: 1,
            initial_node: 0,
            legs: vec![Leg {
                origin: 0,
                destination: 1,
                depart_span: 1,
                arrive_span: 2,
            }],
        };
        assert!(short.validate(&t, 8).is_err());
        let no_rest = Itinerary {
            mer_id: 1,
            initial_node: 0,
            legs: vec![
                Leg {
                    origin: 0,
                    destination: 2,
                    depart_span: 1,
                    arrive_span: 1,
                },
                Leg {
                    origin: 2,
                    destination: 1,
                    depart_span: 2,
                    arrive_span: 2,
                },
            ],
        };
        assert!(no_rest.validate(&t, 8).is_err());
    }
}
