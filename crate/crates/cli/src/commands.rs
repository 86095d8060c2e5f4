use crate::{server, Exit, SpeedArg};
use serde_json::json;
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use tcbforge::drc::{resistance_breakdown, run_drc, DrcConfig, DrcReport};
use tcbforge::dsl::{has_syntax_errors, parse_bytes};
use tcbforge::fabricate::{
    export_stl, generate_solids, parse_gcode_bytes, patch_gcode, plan_process, plan_process_with,
    FabricateError, GcodeError, PatchOptions, SpeedMode, ToolProfile, ToolTable,
};
use tcbforge::layout::BoardDesign;

// Output to a closed pipe is not worth failing over.
macro_rules! say {
    ($w:expr, $($arg:tt)*) => {{ let _ = writeln!($w, $($arg)*); }};
}

fn read(path: &Path, err: &mut dyn Write) -> Result<Vec<u8>, Exit> {
    std::fs::read(path).map_err(|e| {
        say!(err, "error: cannot read {}: {e}", path.display());
        if e.kind() == io::ErrorKind::NotFound {
            Exit::Parse
        } else {
            Exit::Io
        }
    })
}

fn load(path: &Path, err: &mut dyn Write) -> Result<BoardDesign, Exit> {
    let bytes = read(path, err)?;
    parse_bytes(&bytes).map_err(|errors| {
        for e in &errors {
            say!(err, "{}:{e}", path.display());
        }
        if has_syntax_errors(&errors) {
            Exit::Parse
        } else {
            Exit::Failed
        }
    })
}

fn config(set: &[String], err: &mut dyn Write) -> Result<DrcConfig, Exit> {
    let mut cfg = DrcConfig::default();
    for s in set {
        if let Err(e) = cfg.apply_assignment(s) {
            say!(err, "error: --set {s}: {e}");
            return Err(Exit::Parse);
        }
    }
    Ok(cfg)
}

fn report_out(report: &DrcReport, json: bool, out: &mut dyn Write) {
    if json {
        say!(out, "{}", report.to_json());
    } else {
        let _ = write!(out, "{}", report.to_text());
    }
}

fn exit_of<T>(r: Result<T, Exit>) -> Exit {
    match r {
        Ok(_) => Exit::Ok,
        Err(e) => e,
    }
}

pub fn check(
    design: &Path,
    json: bool,
    set: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Exit {
    exit_of((|| {
        let cfg = config(set, err)?;
        let board = load(design, err)?;
        let report = run_drc(&board, &cfg);
        report_out(&report, json, out);
        if report.has_errors() {
            Err(Exit::Failed)
        } else {
            Ok(())
        }
    })())
}

/// File-name stem for a board: its name with anything outside
/// `[A-Za-z0-9._-]` replaced by `_`.
pub fn output_stem(board: &BoardDesign) -> String {
    let s: String = board
        .name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.trim_matches(['.', '_']).is_empty() {
        "board".into()
    } else {
        s
    }
}

fn write_file(path: &Path, bytes: &[u8], err: &mut dyn Write) -> Result<(), Exit> {
    std::fs::write(path, bytes).map_err(|e| {
        say!(err, "error: cannot write {}: {e}", path.display());
        Exit::Io
    })
}

fn fabricate_failure(e: &FabricateError, err: &mut dyn Write) -> Exit {
    say!(err, "error: {e}");
    if let FabricateError::Structural(errs) = e {
        for s in errs {
            say!(err, "  {s}");
        }
    }
    Exit::Failed
}

pub fn compile(
    design: &Path,
    dir: &Path,
    force: bool,
    json: bool,
    set: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Exit {
    exit_of((|| {
        let cfg = config(set, err)?;
        let board = load(design, err)?;
        let report = run_drc(&board, &cfg);
        let errors = report.count(tcbforge::drc::Severity::Error);
        if errors > 0 {
            let _ = write!(err, "{}", report.to_text());
            if !force {
                say!(
                    err,
                    "error: {errors} DRC error(s); nothing written (use --force to write anyway)"
                );
                return Err(Exit::Failed);
            }
        }
        let solids = generate_solids(&board).map_err(|e| fabricate_failure(&e, err))?;
        let plan = if errors > 0 {
            plan_process_with(&board, &DrcReport::default(), &cfg.material)
        } else {
            plan_process_with(&board, &report, &cfg.material)
        }
        .map_err(|e| fabricate_failure(&e, err))?;
        let substrate = export_stl(&solids.substrate).map_err(|e| fabricate_failure(&e, err))?;
        let conductor = export_stl(&solids.conductor).map_err(|e| fabricate_failure(&e, err))?;

        std::fs::create_dir_all(dir).map_err(|e| {
            say!(err, "error: cannot create {}: {e}", dir.display());
            Exit::Io
        })?;
        let stem = output_stem(&board);
        let paths: [PathBuf; 3] = [
            dir.join(format!("{stem}_substrate.stl")),
            dir.join(format!("{stem}_conductor.stl")),
            dir.join(format!("{stem}_plan.txt")),
        ];
        let mut plan_text = String::new();
        if errors > 0 {
            plan_text.push_str(&format!(
                "# written with --force despite {errors} DRC error(s)\n"
            ));
        }
        plan_text.push_str(&plan.to_text());
        write_file(&paths[0], &substrate, err)?;
        write_file(&paths[1], &conductor, err)?;
        write_file(&paths[2], plan_text.as_bytes(), err)?;

        let resist: BTreeMap<&str, (f64, f64, f64)> = board
            .traces
            .iter()
            .filter_map(|t| {
                resistance_breakdown(t, &board, &cfg)
                    .ok()
                    .map(|r| (t.id.as_str(), (r.length, r.unplated, r.plated)))
            })
            .collect();
        let (vs, vc) = (
            solids.substrate.signed_volume(),
            solids.conductor.signed_volume(),
        );
        if json {
            let traces: Vec<_> = resist
                .iter()
                .map(|(id, (l, u, p))| json!({"id": id, "length_mm": l, "unplated_ohm": u, "plated_ohm": p}))
                .collect();
            let doc = json!({
                "board": board.name,
                "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                "traces": traces,
                "substrate_volume_mm3": vs,
                "conductor_volume_mm3": vc,
                "substrate_triangles": solids.substrate.triangles.len(),
                "conductor_triangles": solids.conductor.triangles.len(),
                "plating_minutes": plan.plating_minutes(),
                "drc_errors": errors,
            });
            say!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).expect("summary serializes")
            );
        } else {
            say!(
                out,
                "{}: {} trace(s), {} via(s), {} socket(s)",
                board.name,
                board.traces.len(),
                board.vias.len(),
                board.sockets.len()
            );
            say!(
                out,
                "substrate {vs:.3} mm^3 ({} triangles)",
                solids.substrate.triangles.len()
            );
            say!(
                out,
                "conductor {vc:.3} mm^3 ({} triangles)",
                solids.conductor.triangles.len()
            );
            for (id, (l, u, p)) in &resist {
                say!(
                    out,
                    "trace {id}: {l:.2} mm, {u:.3} ohm unplated, {p:.4} ohm plated"
                );
            }
            for p in &paths {
                say!(out, "wrote {}", p.display());
            }
        }
        if errors > 0 {
            Err(Exit::Failed)
        } else {
            Ok(())
        }
    })())
}

fn tool_table(specs: &[String], cfg: &DrcConfig, err: &mut dyn Write) -> Result<ToolTable, Exit> {
    let mut tools = ToolTable::from([
        (0, ToolProfile::insulator()),
        (1, ToolProfile::conductive(&cfg.material)),
    ]);
    for s in specs {
        let parsed = s.split_once('=').and_then(|(n, m)| {
            let n: u32 = n.trim().parse().ok()?;
            let p = match m.trim() {
                "insulator" | "pla" => ToolProfile::insulator(),
                "conductive" | "conductor" => ToolProfile::conductive(&cfg.material),
                _ => return None,
            };
            Some((n, p))
        });
        match parsed {
            Some((n, p)) => {
                tools.insert(n, p);
            }
            None => {
                say!(
                    err,
                    "error: --tool {s}: expected N=insulator or N=conductive"
                );
                return Err(Exit::Parse);
            }
        }
    }
    Ok(tools)
}

/// `part.gcode` becomes `part.tcb.gcode` in the same directory.
fn patched_path(input: &Path) -> PathBuf {
    let name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name
        .strip_suffix(".gcode")
        .or_else(|| name.strip_suffix(".GCODE"))
        .unwrap_or(&name);
    input.with_file_name(format!("{stem}.tcb.gcode"))
}

#[allow(clippy::too_many_arguments)]
pub fn gcode(
    input: &Path,
    specs: &[String],
    speed: SpeedArg,
    sliced_speed: f64,
    purge: bool,
    set: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Exit {
    exit_of((|| {
        let cfg = config(set, err)?;
        let tools = tool_table(specs, &cfg, err)?;
        let bytes = read(input, err)?;
        let program = parse_gcode_bytes(&bytes).map_err(|e| {
            say!(err, "{}: {e}", input.display());
            Exit::Parse
        })?;
        let options = PatchOptions {
            speed: match speed {
                SpeedArg::None => SpeedMode::None,
                SpeedArg::M220 => SpeedMode::M220,
                SpeedArg::Feedrate => SpeedMode::Feedrate,
            },
            sliced_speed,
            purge_comment: purge,
            ..PatchOptions::default()
        };
        let (patched, summary) = patch_gcode(&program, &tools, &options).map_err(|e| {
            say!(err, "{}: {e}", input.display());
            match e {
                GcodeError::UnknownTool { .. } => Exit::Failed,
                _ => Exit::Parse,
            }
        })?;
        if summary.already_patched && !summary.changed() {
            say!(out, "{}: already patched, no changes", input.display());
            return Ok(());
        }
        let target = patched_path(input);
        write_file(&target, patched.text().as_bytes(), err)?;
        if !summary.changed() {
            say!(
                err,
                "warning: no tool changes found; wrote an unchanged copy"
            );
        }
        say!(
            out,
            "{} tool change(s) replaced with M600 filament swaps",
            summary.swaps
        );
        if summary.initial_selection {
            say!(out, "initial tool selection set to a temperature only");
        }
        for (line, t) in &summary.temperatures {
            say!(out, "  line {line}: M104 S{t}");
        }
        if summary.feedrates_rewritten > 0 {
            say!(
                out,
                "{} conductive move feedrate(s) rewritten",
                summary.feedrates_rewritten
            );
        }
        say!(out, "wrote {}", target.display());
        Ok(())
    })())
}

pub fn plan(
    design: &Path,
    json: bool,
    set: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Exit {
    exit_of((|| {
        let cfg = config(set, err)?;
        let board = load(design, err)?;
        let report = run_drc(&board, &cfg);
        if report.has_errors() {
            let _ = write!(err, "{}", report.to_text());
        }
        let plan = plan_process(&board, &report).map_err(|e| fabricate_failure(&e, err))?;
        if json {
            say!(out, "{}", plan.to_json());
        } else {
            let _ = write!(out, "{}", plan.to_text());
        }
        Ok(())
    })())
}

pub fn serve(
    design: &Path,
    port: u16,
    set: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Exit {
    exit_of((|| {
        let cfg = config(set, err)?;
        let board = load(design, err)?;
        let runtime = tokio::runtime::Runtime::new().map_err(|e| {
            say!(err, "error: cannot start runtime: {e}");
            Exit::Environment
        })?;
        runtime.block_on(async {
            let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
                .await
                .map_err(|e| {
                    say!(err, "error: cannot listen on 127.0.0.1:{port}: {e}");
                    Exit::Environment
                })?;
            say!(
                out,
                "serving {} on http://127.0.0.1:{port}",
                design.display()
            );
            let _ = out.flush();
            let app = server::router(server::Session::new(board, design.to_path_buf(), cfg));
            axum::serve(listener, app).await.map_err(|e| {
                say!(err, "error: server stopped: {e}");
                Exit::Io
            })
        })
    })())
}
