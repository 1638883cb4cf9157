//! HTTP and WebSocket front end for viewer sessions.
//!
//! Each socket owns at most one session and runs a single event loop that
//! merges client messages with frame ticks. Frames go out through a bounded
//! queue; when the client cannot keep up, frames are dropped rather than
//! delaying the session clock.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use hoopvis::bundle::{BundleMeta, GameBundle};
use hoopvis::session::{PlayState, Session};
use hoopvis::wire::{self, ErrorCode, Message};
use serde::Serialize;
use tokio::sync::mpsc;
use tokio::time::MissedTickBehavior;

use crate::CliError;

/// Frames buffered per socket before new ones are dropped.
pub const FRAME_QUEUE: usize = 32;

#[derive(Debug)]
pub struct Game {
    pub bundle: Arc<GameBundle>,
    pub dir: PathBuf,
}

#[derive(Debug, Default)]
pub struct Games {
    games: BTreeMap<String, Game>,
    next_session: AtomicU64,
}

impl Games {
    pub fn insert(&mut self, bundle: GameBundle, dir: PathBuf) {
        self.games.insert(
            bundle.meta.game_id.clone(),
            Game {
                bundle: Arc::new(bundle),
                dir,
            },
        );
    }

    pub fn get(&self, id: &str) -> Option<&Game> {
        self.games.get(id)
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    /// A bundle directory, or a directory whose subdirectories are bundles.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut games = Games::default();
        if path.join("bundle.json").is_file() {
            games.insert(GameBundle::load(path)?, path.to_owned());
            return Ok(games);
        }
        let entries = std::fs::read_dir(path).map_err(|_| CliError::missing(path))?;
        let mut dirs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("bundle.json").is_file())
            .collect();
        dirs.sort();
        for d in dirs {
            let bundle = GameBundle::load(&d)?;
            if games.get(&bundle.meta.game_id).is_some() {
                return Err(CliError::Validation(format!("duplicate game id {} in {}", bundle.meta.game_id, d.display())));
            }
            games.insert(bundle, d);
        }
        if games.is_empty() {
            return Err(CliError::Validation(format!("no bundles under {}", path.display())));
        }
        Ok(games)
    }
}

#[derive(Debug, Serialize)]
struct GameSummary<'a> {
    game_id: &'a str,
    frame_count: u32,
    frame_rate: f64,
    width: u32,
    height: u32,
    has_video: bool,
}

pub fn router(games: Arc<Games>) -> Router {
    Router::new()
        .route("/games", get(list_games))
        .route("/games/{id}", get(game_meta))
        .route("/games/{id}/video", get(game_video))
        .route("/ws", get(ws_upgrade))
        .with_state(games)
}

pub async fn serve(games: Arc<Games>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(games)).await
}

async fn list_games(State(games): State<Arc<Games>>) -> Response {
    let list: Vec<GameSummary<'_>> = games
        .games
        .values()
        .map(|g| {
            let m = &g.bundle.meta;
            GameSummary {
                game_id: &m.game_id,
                frame_count: m.frame_count,
                frame_rate: m.frame_rate,
                width: m.width,
                height: m.height,
                has_video: m.video.is_some(),
            }
        })
        .collect();
    Json(list).into_response()
}

async fn game_meta(State(games): State<Arc<Games>>, UrlPath(id): UrlPath<String>) -> Result<Json<BundleMeta>, StatusCode> {
    games.get(&id).map(|g| Json(g.bundle.meta.clone())).ok_or(StatusCode::NOT_FOUND)
}

fn video_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("mp4") | Some("m4v") => "video/mp4",
        Some("webm") => "video/webm",
        Some("ogv") | Some("ogg") => "video/ogg",
        _ => "application/octet-stream",
    }
}

async fn game_video(State(games): State<Arc<Games>>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(path) = games.get(&id).and_then(|g| g.bundle.video_path(&g.dir)) else {
        return StatusCode::NOT_FOUND.into_response();
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, video_type(&path))], Body::from(bytes)).into_response(),
        Err(e) => {
            log::warn!("{}: {e}", path.display());
            StatusCode::NOT_FOUND.into_response()
        }
    }
}

async fn ws_upgrade(State(games): State<Arc<Games>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| run_socket(games, socket))
}

fn error(code: ErrorCode, message: impl Into<String>) -> Message {
    Message::Error {
        code,
        message: message.into(),
    }
}

fn state_of(s: &Session) -> Message {
    Message::State {
        playing: s.play_state() == PlayState::Playing,
        playhead: s.playhead(),
    }
}

/// Handle one client message.
fn handle(games: &Games, session: &mut Option<Session>, msg: Message) -> Message {
    match msg {
        Message::Create { game_id, overrides } => {
            let Some(game) = games.get(&game_id) else {
                return error(ErrorCode::NotFound, format!("no game {game_id}"));
            };
            match Session::new(game.bundle.clone(), &overrides) {
                Ok(s) => {
                    let n = games.next_session.fetch_add(1, Ordering::Relaxed);
                    let reply = Message::Created {
                        session_id: format!("s{n}"),
                        frame_count: s.bundle().frame_count(),
                        frame_rate: s.bundle().frame_rate(),
                    };
                    *session = Some(s);
                    reply
                }
                Err(e) => error(e.code(), e.to_string()),
            }
        }
        Message::Control(op) => {
            let Some(s) = session.as_mut() else {
                return error(ErrorCode::NoSession, "no session");
            };
            match s.control(op) {
                Ok(_) => state_of(s),
                Err(e) => error(e.code(), e.to_string()),
            }
        }
        Message::Gaze(sample) => {
            let Some(s) = session.as_mut() else {
                return error(ErrorCode::NoSession, "no session");
            };
            let timestamp = sample.timestamp;
            match s.submit_gaze(sample) {
                Ok(_) => Message::Ack { timestamp },
                Err(e) => error(e.code(), e.to_string()),
            }
        }
        other => error(ErrorCode::BadMessage, format!("unexpected client message {other:?}")),
    }
}

fn tick_period(s: &Session) -> Duration {
    Duration::from_secs_f64(1.0 / s.bundle().frame_rate())
}

async fn run_socket(games: Arc<Games>, socket: WebSocket) {
    let (mut sink, mut stream) = socket.split();
    // replies must arrive; frames may be shed
    let (reply_tx, mut reply_rx) = mpsc::channel::<Vec<u8>>(64);
    let (frame_tx, mut frame_rx) = mpsc::channel::<Vec<u8>>(FRAME_QUEUE);
    let writer = tokio::spawn(async move {
        loop {
            let bytes = tokio::select! {
                biased;
                r = reply_rx.recv() => r,
                f = frame_rx.recv() => f,
            };
            let Some(bytes) = bytes else { break };
            if sink.send(WsMessage::Binary(bytes.into())).await.is_err() {
                break;
            }
        }
    });

    let mut session: Option<Session> = None;
    let mut ticker: Option<tokio::time::Interval> = None;
    let mut dropped = 0u64;
    loop {
        let playing = session.as_ref().is_some_and(|s| s.play_state() == PlayState::Playing);
        if !playing {
            ticker = None;
        } else if ticker.is_none() {
            let mut t = tokio::time::interval(tick_period(session.as_ref().expect("playing implies a session")));
            t.set_missed_tick_behavior(MissedTickBehavior::Burst);
            ticker = Some(t);
        }
        tokio::select! {
            incoming = stream.next() => {
                let bytes = match incoming {
                    None | Some(Err(_)) | Some(Ok(WsMessage::Close(_))) => break,
                    Some(Ok(WsMessage::Binary(b))) => b,
                    Some(Ok(WsMessage::Text(_))) => {
                        let e = wire::encode(&error(ErrorCode::BadMessage, "binary messages only"));
                        if reply_tx.send(e).await.is_err() { break }
                        continue;
                    }
                    Some(Ok(_)) => continue,
                };
                let reply = match wire::decode(&bytes) {
                    Ok(msg) => {
                        if matches!(msg, Message::Control(wire::ControlOp::Seek(_))) {
                            // restart pacing from the new playhead
                            ticker = None;
                        }
                        handle(&games, &mut session, msg)
                    }
                    Err(e) => error(ErrorCode::BadMessage, e.to_string()),
                };
                if reply_tx.send(wire::encode(&reply)).await.is_err() { break }
            }
            _ = async { ticker.as_mut().expect("ticker set while playing").tick().await }, if playing && ticker.is_some() => {
                let s = session.as_mut().expect("ticking implies a session");
                if let Some(frame) = s.tick() {
                    match frame_tx.try_send(wire::encode_frame(frame.frame, &frame.commands)) {
                        Ok(()) => {}
                        Err(mpsc::error::TrySendError::Full(_)) => {
                            dropped += 1;
                            log::debug!("client behind, dropped frame {}", frame.frame);
                        }
                        Err(mpsc::error::TrySendError::Closed(_)) => break,
                    }
                    if s.play_state() == PlayState::Paused {
                        // behind the last frame, not ahead of it
                        if frame_tx.send(wire::encode(&state_of(s))).await.is_err() { break }
                    }
                }
            }
        }
    }
    if dropped > 0 {
        log::info!("socket closed after dropping {dropped} frames");
    }
    drop(reply_tx);
    drop(frame_tx);
    let _ = writer.await;
}
