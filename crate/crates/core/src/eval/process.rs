// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io;
use std::os::unix::process::CommandExt;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Exit code; death by signal is reported as -1.
    Exited(i32),
    TimedOut,
}

/// Runs `cmd` under `sh -c` in its own process group, output to `log`. On
/// timeout the whole group is killed.
pub fn run_command(
    cmd: &str,
    cwd: &Path,
    env: &[(&str, &str)],
    timeout: Duration,
    log: &Path,
) -> io::Result<RunStatus> {
    let out = File::create(log)?;
    let err = out.try_clone()?;
    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(cmd)
        .current_dir(cwd)
        .env("MUTASCOPE_ROOT", cwd)
        .stdin(Stdio::null())
        .stdout(out)
        .stderr(err)
        .process_group(0);
    for (k, v) in env {
        command.env(k, v);
    }
    let mut child = command.spawn()?;
    match child.wait_timeout(timeout)? {
        Some(status) => Ok(RunStatus::Exited(status.code().unwrap_or(-1))),
        None => {
            // SAFETY: plain kill(2) on the child's process group.
            unsafe {
                libc::kill(-(child.id() as i32), libc::SIGKILL);
            }
            child.wait()?;
            Ok(RunStatus::TimedOut)
        }
    }
}
