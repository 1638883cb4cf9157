mod common;

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::fixtures;
use futures::{SinkExt, StreamExt};
use hoopvis::bundle::GameBundle;
use hoopvis::gaze::{load_gaze_trace, GazeSample};
use hoopvis::replay::replay;
use hoopvis::wire::{decode, encode, ControlOp, ErrorCode, Message};
use hoopvis_cli::server::{router, serve, Games};
use tokio_tungstenite::tungstenite::Message as Ws;
use tower::ServiceExt;

fn copy_bundle(to: &Path, game_id: &str, video: Option<&str>) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(fixtures().join("demo/bundle")).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
    let path = to.join("bundle.json");
    let mut meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    meta["game_id"] = game_id.into();
    if let Some(v) = video {
        meta["video"] = v.into();
        std::fs::write(to.join(v), b"not really a video").unwrap();
    }
    std::fs::write(&path, serde_json::to_string(&meta).unwrap()).unwrap();
}

async fn get(games: &Arc<Games>, uri: &str) -> (StatusCode, Option<String>, Vec<u8>) {
    let res = router(games.clone())
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    let ctype = res.headers().get("content-type").map(|v| v.to_str().unwrap().to_owned());
    let body = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, ctype, body.to_vec())
}

#[tokio::test]
async fn static_endpoints() {
    let tmp = tempfile::tempdir().unwrap();
    copy_bundle(&tmp.path().join("a"), "game-a", Some("clip.mp4"));
    copy_bundle(&tmp.path().join("b"), "game-b", None);
    let games = Arc::new(Games::load(tmp.path()).unwrap());
    assert_eq!(games.len(), 2);

    let (status, _, body) = get(&games, "/games").await;
    assert_eq!(status, StatusCode::OK);
    let list: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(list[0]["game_id"], "game-a");
    assert_eq!(list[0]["has_video"], true);
    assert_eq!(list[1]["frame_count"], 100);

    let (status, _, body) = get(&games, "/games/game-b").await;
    assert_eq!(status, StatusCode::OK);
    let meta: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(meta["frame_rate"], 30.0);
    assert_eq!(meta["width"], 640);

    assert_eq!(get(&games, "/games/nope").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&games, "/games/game-b/video").await.0, StatusCode::NOT_FOUND);
    let (status, ctype, body) = get(&games, "/games/game-a/video").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("video/mp4"));
    assert_eq!(body, b"not really a video");
}

#[test]
fn loading_rejects_duplicates_and_empty_dirs() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(Games::load(tmp.path()).is_err());
    copy_bundle(&tmp.path().join("a"), "same", None);
    copy_bundle(&tmp.path().join("b"), "same", None);
    let e = Games::load(tmp.path()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let single = Games::load(&fixtures().join("demo/bundle")).unwrap();
    assert!(single.get("demo").is_some());
}

type Client = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn connect() -> Client {
    let games = Arc::new(Games::load(&fixtures().join("demo/bundle")).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(games, listener));
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
    ws
}

async fn send(ws: &mut Client, m: &Message) {
    ws.send(Ws::Binary(encode(m).into())).await.unwrap();
}

async fn recv(ws: &mut Client) -> Message {
    loop {
        match ws.next().await.unwrap().unwrap() {
            Ws::Binary(b) => return decode(&b).unwrap(),
            _ => continue,
        }
    }
}

async fn expect_error(ws: &mut Client, code: ErrorCode) {
    match recv(ws).await {
        Message::Error { code: c, .. } => assert_eq!(c, code),
        other => panic!("expected {code:?}, got {other:?}"),
    }
}

fn create(game: &str, overrides: &str) -> Message {
    Message::Create {
        game_id: game.into(),
        overrides: overrides.into(),
    }
}

#[tokio::test]
async fn socket_errors() {
    let mut ws = connect().await;
    send(&mut ws, &Message::Gaze(GazeSample::new(0.1, 1.0, 1.0))).await;
    expect_error(&mut ws, ErrorCode::NoSession).await;
    send(&mut ws, &Message::Control(ControlOp::Play)).await;
    expect_error(&mut ws, ErrorCode::NoSession).await;
    send(&mut ws, &create("nope", "")).await;
    expect_error(&mut ws, ErrorCode::NotFound).await;
    send(&mut ws, &create("demo", "[gaze]\nlinger = -2\n")).await;
    expect_error(&mut ws, ErrorCode::BadConfig).await;
    ws.send(Ws::Binary(vec![1, 0, 0, 0, 0x7f].into())).await.unwrap();
    expect_error(&mut ws, ErrorCode::BadMessage).await;
    ws.send(Ws::Text("hello".into())).await.unwrap();
    expect_error(&mut ws, ErrorCode::BadMessage).await;

    send(&mut ws, &create("demo", "")).await;
    match recv(&mut ws).await {
        Message::Created {
            frame_count, frame_rate, ..
        } => assert_eq!((frame_count, frame_rate), (100, 30.0)),
        other => panic!("{other:?}"),
    }
    send(&mut ws, &Message::Control(ControlOp::Seek(100))).await;
    expect_error(&mut ws, ErrorCode::SeekOutOfRange).await;
    send(&mut ws, &Message::Control(ControlOp::Seek(99))).await;
    assert_eq!(recv(&mut ws).await, Message::State { playing: false, playhead: 99 });

    // paused: acknowledged, then ignored; monotonicity is only enforced on accepted samples
    send(&mut ws, &Message::Gaze(GazeSample::new(0.5, 1.0, 1.0))).await;
    assert_eq!(recv(&mut ws).await, Message::Ack { timestamp: 0.5 });
    send(&mut ws, &Message::Control(ControlOp::Play)).await;
    assert_eq!(recv(&mut ws).await, Message::State { playing: true, playhead: 99 });
    // the last frame, then playback stops by itself
    assert!(matches!(recv(&mut ws).await, Message::Frame { frame: 99, .. }));
    assert_eq!(recv(&mut ws).await, Message::State { playing: false, playhead: 99 });

    send(&mut ws, &Message::Control(ControlOp::Seek(0))).await;
    assert_eq!(recv(&mut ws).await, Message::State { playing: false, playhead: 0 });
    send(&mut ws, &Message::Control(ControlOp::Play)).await;
    send(&mut ws, &Message::Gaze(GazeSample::new(1.0, 1.0, 1.0))).await;
    send(&mut ws, &Message::Gaze(GazeSample::new(0.9, 1.0, 1.0))).await;
    send(&mut ws, &Message::Control(ControlOp::Pause)).await;
    let mut replies = Vec::new();
    while replies.len() < 4 {
        match recv(&mut ws).await {
            Message::Frame { .. } => {}
            m => replies.push(m),
        }
    }
    assert!(matches!(replies[0], Message::State { playing: true, .. }));
    assert_eq!(replies[1], Message::Ack { timestamp: 1.0 });
    assert!(matches!(replies[2], Message::Error { code: ErrorCode::NonMonotoneGaze, .. }));
    assert!(matches!(replies[3], Message::State { playing: false, .. }));
}

#[tokio::test]
async fn streamed_session_equals_offline_replay() {
    let dir = fixtures().join("demo");
    let bundle = GameBundle::load(dir.join("bundle")).unwrap();
    let trace = load_gaze_trace(dir.join("gaze.csv")).unwrap();
    let offline = replay(&bundle, &trace, &bundle.config).unwrap();

    let mut ws = connect().await;
    send(&mut ws, &create("demo", "")).await;
    assert!(matches!(recv(&mut ws).await, Message::Created { .. }));
    // one batch: play, then the whole trace, ahead of presentation time
    ws.feed(Ws::Binary(encode(&Message::Control(ControlOp::Play)).into())).await.unwrap();
    for s in &trace {
        ws.feed(Ws::Binary(encode(&Message::Gaze(*s)).into())).await.unwrap();
    }
    ws.flush().await.unwrap();

    let mut frames = Vec::new();
    let mut acks = 0;
    loop {
        match recv(&mut ws).await {
            Message::Frame { frame, commands } => frames.push((frame, commands)),
            Message::Ack { .. } => acks += 1,
            Message::State { playing: false, .. } => break,
            Message::State { .. } => {}
            other => panic!("{other:?}"),
        }
    }
    assert_eq!(acks, trace.len());
    assert_eq!(frames.len(), offline.len());
    for ((f, cmds), o) in frames.iter().zip(&offline) {
        assert_eq!(*f, o.frame);
        assert_eq!(cmds, &o.commands, "frame {f}");
    }
}

#[tokio::test]
async fn sessions_are_isolated() {
    let mut a = connect().await;
    let mut b = connect().await;
    for ws in [&mut a, &mut b] {
        send(ws, &create("demo", "")).await;
        assert!(matches!(recv(ws).await, Message::Created { .. }));
    }
    send(&mut a, &Message::Control(ControlOp::Seek(50))).await;
    assert_eq!(recv(&mut a).await, Message::State { playing: false, playhead: 50 });
    send(&mut b, &Message::Control(ControlOp::Pause)).await;
    assert_eq!(recv(&mut b).await, Message::State { playing: false, playhead: 0 });
}
