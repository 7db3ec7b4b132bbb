//! Live demonstration sessions over a websocket.
//!
//! The client sends macro-actions, the server simulates them and streams
//! the frames back. When Mario dies, reaches the goal or the client asks to
//! close, the trace is characterized and the two nearest dataset entries
//! are returned.

use std::collections::BTreeSet;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use mariomix_core::world::{run_macro_action, SimError};
use mariomix_core::{characterize_trace, Action, Level, Outcome, PolicyDataset, Replay, WorldState};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorBody};
use crate::routes::ApiQuery;
use crate::state::AppState;

#[derive(Debug, Deserialize)]
pub struct DemoQuery {
    pub level_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Action { action: Action },
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Closed,
    Died,
    Won,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Session {
        session_id: String,
        level_id: String,
        frame: WorldState,
    },
    Frames {
        frames: Vec<WorldState>,
    },
    Finished {
        reason: FinishReason,
        two_matches: Vec<String>,
        actions: Vec<(u32, Action)>,
        checksum: String,
    },
    Error(ErrorBody),
}

fn error(code: &str, message: impl Into<String>) -> ServerMessage {
    ServerMessage::Error(ErrorBody {
        code: code.to_string(),
        message: message.into(),
    })
}

pub async fn demo_socket(
    State(state): State<AppState>,
    ApiQuery(q): ApiQuery<DemoQuery>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let dataset = state.dataset.clone().ok_or_else(ApiError::dataset_not_loaded)?;
    let level = state
        .level(&q.level_id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no level `{}`", q.level_id)))?;
    let idle = state.config.idle_timeout;
    Ok(ws.on_upgrade(move |socket| async move {
        let session = Session::new(level);
        session.run(socket, &dataset, idle).await;
    }))
}

/// One player's run. Owned by exactly one connection task.
struct Session {
    id: String,
    level: Level,
    world: WorldState,
    frames: Vec<WorldState>,
    actions: Vec<(u32, Action)>,
}

enum Step {
    Continue(ServerMessage),
    Finish(Option<ServerMessage>, FinishReason),
}

impl Session {
    fn new(level: Level) -> Session {
        let world = WorldState::initial(&level);
        Session {
            id: format!("{:016x}", rand::rng().random::<u64>()),
            frames: vec![world.clone()],
            world,
            level,
            actions: Vec::new(),
        }
    }

    fn act(&mut self, action: Action) -> Step {
        let start = self.frames.len();
        let tick = self.world.tick;
        let frames = &mut self.frames;
        match run_macro_action(&mut self.world, &self.level, action, |s| frames.push(s.clone())) {
            Err(SimError::ActionOnTerminalState(_)) => {
                let reason = self.terminal_reason().unwrap_or(FinishReason::Closed);
                return Step::Finish(
                    Some(error("ActionOnTerminalState", "the episode has already ended")),
                    reason,
                );
            }
            Ok(()) => self.actions.push((tick, action)),
        }
        let msg = ServerMessage::Frames {
            frames: self.frames[start..].to_vec(),
        };
        match self.terminal_reason() {
            Some(reason) => Step::Finish(Some(msg), reason),
            None => Step::Continue(msg),
        }
    }

    fn terminal_reason(&self) -> Option<FinishReason> {
        match self.world.outcome {
            Outcome::Ongoing => None,
            Outcome::Won => Some(FinishReason::Won),
            Outcome::Dead => Some(FinishReason::Died),
        }
    }

    fn finish(self, dataset: &PolicyDataset, reason: FinishReason) -> ServerMessage {
        let replay = Replay {
            level_id: self.level.id.clone(),
            seed: 0,
            actions: self.actions,
            frames: self.frames,
            segment_marks: None,
        };
        let metrics = match characterize_trace(&replay, &self.level) {
            Ok(m) => m,
            Err(e) => return error("EmptyTrace", e.to_string()),
        };
        match dataset.nearest(&metrics, 2, &BTreeSet::new()) {
            Ok(two_matches) => ServerMessage::Finished {
                reason,
                two_matches,
                checksum: format!("{:016x}", replay.checksum()),
                actions: replay.actions,
            },
            Err(e) => error("EmptyDatasetAfterExclusion", e.to_string()),
        }
    }

    async fn run(mut self, mut socket: WebSocket, dataset: &PolicyDataset, idle: Duration) {
        let hello = ServerMessage::Session {
            session_id: self.id.clone(),
            level_id: self.level.id.clone(),
            frame: self.world.clone(),
        };
        if send(&mut socket, &hello).await.is_err() {
            return;
        }
        loop {
            let msg = match tokio::time::timeout(idle, socket.recv()).await {
                Err(_) => {
                    let _ = send(&mut socket, &error("SessionExpired", "no input within the idle timeout")).await;
                    break;
                }
                // the client went away; nobody is left to read a result
                Ok(None) | Ok(Some(Err(_))) | Ok(Some(Ok(Message::Close(_)))) => return,
                Ok(Some(Ok(Message::Text(text)))) => text,
                Ok(Some(Ok(_))) => continue,
            };
            let step = match serde_json::from_str::<ClientMessage>(&msg) {
                Err(e) => Step::Continue(error("BadRequest", e.to_string())),
                Ok(ClientMessage::Close) => Step::Finish(None, FinishReason::Closed),
                Ok(ClientMessage::Action { action }) => self.act(action),
            };
            match step {
                Step::Continue(reply) => {
                    if send(&mut socket, &reply).await.is_err() {
                        return;
                    }
                }
                Step::Finish(reply, reason) => {
                    if let Some(reply) = reply {
                        if send(&mut socket, &reply).await.is_err() {
                            return;
                        }
                    }
                    let done = self.finish(dataset, reason);
                    let _ = send(&mut socket, &done).await;
                    break;
                }
            }
        }
        let _ = socket.send(Message::Close(None)).await;
    }
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> Result<(), axum::Error> {
    let text = serde_json::to_string(msg).expect("server message serializes");
    socket.send(Message::Text(text.into())).await
}
