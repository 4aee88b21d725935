use std::thread;
use std::time::Duration;

use super::transport::Requester;
use super::wire::Message;
use super::MeshError;
use crate::rl::{checkpoint, CurveRow, EpisodeData, Trainer};

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub server: String,
    /// Per-request transport timeout.
    pub timeout: Duration,
    /// Attempts per episode before giving up.
    pub attempts: usize,
    pub backoff: Duration,
}

impl ClientConfig {
    pub fn new(server: &str) -> Self {
        Self {
            server: server.to_string(),
            timeout: Duration::from_secs(120),
            attempts: 20,
            backoff: Duration::from_millis(250),
        }
    }
}

fn collect(req: &mut Requester, weights: &Message, rollout: &Message) -> Result<EpisodeData, MeshError> {
    match req.request(weights)? {
        Message::Ack(_) => {}
        Message::Error(s) => return Err(MeshError::Remote(s)),
        m => return Err(MeshError::Protocol(format!("{:?} in reply to WEIGHTS", m.msg_type()))),
    }
    match req.request(rollout)? {
        Message::EpisodeData(d) => Ok(d),
        Message::Error(s) => Err(MeshError::Remote(s)),
        m => Err(MeshError::Protocol(format!("{:?} in reply to ROLLOUT_REQUEST", m.msg_type()))),
    }
}

/// Train with every episode collected by a remote rollout server: push the
/// current weights, request the rollout, ingest the data and update.
///
/// Failed episodes are retried from the weight push, so a restarted server
/// is picked up transparently. On error the trainer keeps every episode
/// completed so far.
pub fn train_client(
    trainer: &mut Trainer,
    client: &ClientConfig,
    mut on_episode: impl FnMut(&Trainer, &CurveRow),
) -> Result<(), MeshError> {
    let mut req = Requester::new(&client.server, client.timeout);
    while !trainer.finished() {
        let weights = Message::Weights(checkpoint::encode(&trainer.policy()));
        let request = trainer.rollout_request();
        let rollout = Message::RolloutRequest(request.clone());
        let mut attempt = 0;
        let data = loop {
            attempt += 1;
            match collect(&mut req, &weights, &rollout) {
                Ok(d) if d.episode == request.episode => break d,
                Ok(d) => {
                    return Err(MeshError::Protocol(format!(
                        "episode {} returned for request {}",
                        d.episode, request.episode
                    )))
                }
                Err(e) if attempt >= client.attempts => {
                    return Err(MeshError::RetriesExhausted {
                        episode: trainer.next_episode(),
                        attempts: attempt,
                        last: e.to_string(),
                    })
                }
                Err(_) => thread::sleep(client.backoff),
            }
        };
        let row = trainer.ingest(&data);
        on_episode(trainer, &row);
    }
    Ok(())
}
