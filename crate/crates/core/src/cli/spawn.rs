use std::io::{self, BufRead, BufReader};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Child, Command, Stdio};

use crate::mesh::Clock;

/// Control, pose and rollout-server children on loopback ports, killed on drop.
pub struct MeshChildren {
    children: Vec<Child>,
    /// Rollout server request address.
    pub server: String,
}

fn free_ports(n: usize) -> io::Result<Vec<u16>> {
    let listeners = (0..n).map(|_| TcpListener::bind("127.0.0.1:0")).collect::<io::Result<Vec<_>>>()?;
    listeners.iter().map(|l| Ok(l.local_addr()?.port())).collect()
}

impl MeshChildren {
    pub fn spawn(bin: &Path, physics: &Path, clock: Clock) -> io::Result<Self> {
        let p = free_ports(5)?;
        let addr = |i: usize| format!("127.0.0.1:{}", p[i]);
        let (rollout, telemetry, truth, actions, poses) = (addr(0), addr(1), addr(2), addr(3), addr(4));
        let clock = clock.to_string();
        let physics = physics.to_string_lossy().into_owned();
        let specs: [Vec<&str>; 3] = [
            vec![
                "rollout-server", "--rollout", &rollout, "--actions", &actions, "--telemetry", &telemetry, "--poses", &poses,
                "--clock", &clock, "--physics", &physics,
            ],
            vec![
                "control", "--telemetry", &telemetry, "--truth", &truth, "--actions", &actions, "--clock", &clock,
                "--physics", &physics,
            ],
            vec!["pose", "--truth", &truth, "--poses", &poses, "--clock", &clock],
        ];
        let mut me = Self {
            children: Vec::new(),
            server: rollout.clone(),
        };
        for args in specs {
            let mut child = Command::new(bin)
                .args(&args)
                .stdin(Stdio::null())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()?;
            let mut line = String::new();
            let stdout = child.stdout.take().expect("piped");
            BufReader::new(stdout).read_line(&mut line)?;
            me.children.push(child);
            if !line.starts_with("ready") {
                return Err(io::Error::other(format!("{} {} did not start", bin.display(), args[0])));
            }
        }
        Ok(me)
    }
}

impl Drop for MeshChildren {
    fn drop(&mut self) {
        for c in &mut self.children {
            let _ = c.kill();
            let _ = c.wait();
        }
    }
}
