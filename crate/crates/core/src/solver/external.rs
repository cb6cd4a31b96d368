//! Subprocess adapter for SAT-competition style solvers.
//!
//! The formula is written to a temporary DIMACS file and the command is run as
//! `<command> <file>`. Standard output must carry a status line (`s
//! SATISFIABLE`, `s UNSATISFIABLE`, or bare `SAT`/`UNSAT`/`SATISFIABLE`/
//! `UNSATISFIABLE`) and, when satisfiable, zero-terminated model literals on
//! `v`-prefixed or bare integer lines. Solvers conventionally exit with 10 or
//! 20, so the exit code only matters when no status was recognised.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use super::{verify_model, SolveResult};
use crate::cnf::{write_dimacs_with_comments, Assignment, Formula, Literal};
use crate::error::{Error, Result};

pub fn external_solve(f: &Formula, command: &Path) -> Result<SolveResult> {
    // Scoped clauses become part of the file's clause list.
    let mut flat = Formula::new(f.num_vars());
    for c in f.clauses() {
        flat.add_clause(c.clone())?;
    }
    let mut file = tempfile::Builder::new()
        .prefix("satdiv-")
        .suffix(".cnf")
        .tempfile()
        .map_err(|e| Error::io(std::env::temp_dir(), e))?;
    file.write_all(write_dimacs_with_comments(&flat, &[]).as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(file.path(), e))?;

    let output = Command::new(command)
        .arg(file.path())
        .output()
        .map_err(|e| Error::Solver(format!("failed to run {}: {e}", command.display())))?;
    let stdout = String::from_utf8_lossy(&output.stdout);

    match parse_solver_output(&stdout, f.num_vars()) {
        Ok(Some(SolveResult::Sat(x))) => verify_model(f, x),
        Ok(Some(SolveResult::Unsat)) => Ok(SolveResult::Unsat),
        Ok(None) => Err(Error::Solver(format!(
            "{} exited with {} without a recognisable status line",
            command.display(),
            output.status
        ))),
        Err(e) => Err(e),
    }
}

/// Parses solver output. `Ok(None)` means no status line was found.
/// Variables missing from the model line default to false.
pub fn parse_solver_output(text: &str, n: usize) -> Result<Option<SolveResult>> {
    let mut status: Option<bool> = None;
    let mut values = vec![false; n];
    let mut terminated = false;

    for line in text.lines() {
        let line = line.trim();
        let mut toks = line.split_whitespace().peekable();
        let Some(&first) = toks.peek() else { continue };
        match first {
            "c" => continue,
            "s" => {
                toks.next();
                status = parse_status(toks.next().unwrap_or("")).or(status);
                continue;
            }
            "v" => {
                toks.next();
            }
            _ => {
                if let Some(s) = parse_status(first) {
                    status = Some(s);
                    continue;
                }
                if first.parse::<i64>().is_err() {
                    continue;
                }
            }
        }
        for tok in toks {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::Solver(format!("bad model literal `{tok}`")))?;
            if lit == 0 {
                terminated = true;
                break;
            }
            let l = Literal::from_dimacs(lit);
            if l.var as usize > n {
                return Err(Error::Solver(format!("model literal {lit} exceeds n={n}")));
            }
            values[l.index()] = !l.negated;
        }
    }

    match status {
        Some(true) => {
            if !terminated && n > 0 {
                return Err(Error::Solver("satisfiable but no model line".into()));
            }
            Ok(Some(SolveResult::Sat(Assignment::new(values))))
        }
        Some(false) => Ok(Some(SolveResult::Unsat)),
        None => Ok(None),
    }
}

fn parse_status(tok: &str) -> Option<bool> {
    match tok {
        "SAT" | "SATISFIABLE" => Some(true),
        "UNSAT" | "UNSATISFIABLE" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;
    use std::os::unix::fs::PermissionsExt;

    #[test]
    fn parses_competition_output() {
        let out = "c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n";
        let r = parse_solver_output(out, 3).unwrap().unwrap();
        assert_eq!(
            r,
            SolveResult::Sat(Assignment::new(vec![true, false, true]))
        );
        let r = parse_solver_output("s UNSATISFIABLE\n", 3)
            .unwrap()
            .unwrap();
        assert_eq!(r, SolveResult::Unsat);
    }

    #[test]
    fn parses_minisat_style_output() {
        let r = parse_solver_output("SAT\n-1 2 0\n", 2).unwrap().unwrap();
        assert_eq!(r, SolveResult::Sat(Assignment::new(vec![false, true])));
        assert_eq!(
            parse_solver_output("UNSAT\n", 2).unwrap(),
            Some(SolveResult::Unsat)
        );
    }

    #[test]
    fn rejects_out_of_range_model() {
        let err = parse_solver_output("s SATISFIABLE\nv 1 -2 3 0\n", 2).unwrap_err();
        assert!(err.to_string().contains("exceeds n=2"));
    }

    #[test]
    fn no_status_is_none() {
        assert_eq!(parse_solver_output("garbage\n", 2).unwrap(), None);
    }

    fn script(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    #[test]
    fn subprocess_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 0\n").unwrap();

        let good = script(
            dir.path(),
            "good",
            "echo 's SATISFIABLE'; echo 'v -1 2 0'; exit 10",
        );
        assert_eq!(
            external_solve(&f, &good).unwrap(),
            SolveResult::Sat(Assignment::new(vec![false, true]))
        );

        let unsat = script(dir.path(), "unsat", "echo UNSAT; exit 20");
        assert_eq!(external_solve(&f, &unsat).unwrap(), SolveResult::Unsat);

        // A lying solver is caught by local verification.
        let liar = script(dir.path(), "liar", "echo SAT; echo '1 2 0'");
        assert!(matches!(external_solve(&f, &liar), Err(Error::Solver(_))));

        let broken = script(dir.path(), "broken", "exit 3");
        assert!(matches!(external_solve(&f, &broken), Err(Error::Solver(_))));

        let oob = script(dir.path(), "oob", "echo SAT; echo '-1 2 3 0'");
        assert!(matches!(external_solve(&f, &oob), Err(Error::Solver(_))));

        // The file handed to the solver contains the formula.
        let cat = script(
            dir.path(),
            "cat",
            "grep -q '^p cnf 2 2$' \"$1\" && echo UNSAT",
        );
        assert_eq!(external_solve(&f, &cat).unwrap(), SolveResult::Unsat);
    }
}
