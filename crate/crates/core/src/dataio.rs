//! Text formats for topologies, workloads, traces and summaries.
//!
//! Topology files look like
//!
//! ```text
//! Topology: ( 2 Nodes, 1 Edges )
//! Nodes:
//! 0 12.500000 3.000000 3720
//! 1 40.000000 77.125000 5320
//! Edges:
//! 0 0 1 80
//! ```
//!
//! with node lines `<id> <x> <y> <cpu>` and edge lines
//! `<id> <from> <to> <bw>`. Ids are dense from 0 and listed in order.
//! For substrates the resource columns are capacities, for virtual
//! networks demands.
//!
//! A workload file starts with `Workload: ( <n> Requests, seed <s> )`
//! and then holds, per request, a line `Request: <id> <arrival>
//! <lifetime>` followed by the topology block of its virtual network.
//! Blank lines are ignored everywhere.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{NodeId, Position, SubstrateNetwork, VNRequest, VNodeId, VirtualNetwork};
use crate::simulator::{SimSummary, SimTrace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// Non-blank lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => err(
                self.last + 1,
                format!("unexpected end of input, expected {what}"),
            ),
        }
    }

    fn peek(&mut self) -> Option<&(usize, &'a str)> {
        self.inner.peek()
    }
}

fn number<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T, ParseError> {
    field
        .parse()
        .or_else(|_| err(line, format!("invalid {what} `{field}`")))
}

/// Parses `<prefix> ( <a> <word_a>, <b> <word_b> )`, returning `(a, b)`
/// as raw tokens. The tokens after each number must match exactly.
fn header<'a>(
    line: usize,
    text: &'a str,
    prefix: &str,
    words: [&str; 2],
) -> Result<(&'a str, &'a str), ParseError> {
    let malformed = || {
        err(
            line,
            format!(
                "malformed header, expected `{prefix} ( <n> {}, <m> {} )`",
                words[0], words[1]
            ),
        )
    };
    let Some(rest) = text.strip_prefix(prefix) else {
        return malformed();
    };
    let Some(inner) = rest
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
    else {
        return malformed();
    };
    let Some((first, second)) = inner.split_once(',') else {
        return malformed();
    };
    let f: Vec<&str> = first.split_whitespace().collect();
    let s: Vec<&str> = second.split_whitespace().collect();
    match (f.as_slice(), s.as_slice()) {
        ([a, wa], [wb, b]) if *wa == words[0] && *wb == words[1] && words[1] == "seed" => {
            Ok((a, b))
        }
        ([a, wa], [b, wb]) if *wa == words[0] && *wb == words[1] => Ok((a, b)),
        _ => malformed(),
    }
}

/// Node and edge rows of one topology block, before they are turned into
/// a network.
struct Block {
    nodes: Vec<(Position, u64, usize)>,
    edges: Vec<(usize, usize, u64, usize)>,
}

fn read_block(lines: &mut Lines<'_>) -> Result<Block, ParseError> {
    let (hline, htext) = lines.next("topology header")?;
    let (n, m) = header(hline, htext, "Topology:", ["Nodes", "Edges"])?;
    let n: usize = number(hline, n, "node count")?;
    let m: usize = number(hline, m, "edge count")?;

    let (l, t) = lines.next("`Nodes:`")?;
    if t != "Nodes:" {
        return err(l, "expected `Nodes:`");
    }
    let mut nodes = Vec::with_capacity(n);
    while let Some(&(l, t)) = lines.peek() {
        if t == "Edges:" {
            break;
        }
        lines.next("node line")?;
        let f: Vec<&str> = t.split_whitespace().collect();
        let [id, x, y, cpu] = f.as_slice() else {
            return err(l, "node line needs `<id> <x> <y> <cpu>`");
        };
        let id: usize = number(l, id, "node id")?;
        if id != nodes.len() {
            return err(l, format!("expected node id {}, found {id}", nodes.len()));
        }
        let x: f64 = number(l, x, "coordinate")?;
        let y: f64 = number(l, y, "coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return err(l, "coordinates must be finite");
        }
        nodes.push((Position { x, y }, number(l, cpu, "cpu")?, l));
    }
    if nodes.len() != n {
        return err(
            hline,
            format!("header declares {n} nodes, section has {}", nodes.len()),
        );
    }

    let (l, t) = lines.next("`Edges:`")?;
    if t != "Edges:" {
        return err(l, "expected `Edges:`");
    }
    let mut edges = Vec::with_capacity(m);
    while let Some(&(l, t)) = lines.peek() {
        if t.starts_with("Request:") || t.starts_with("Topology:") {
            break;
        }
        lines.next("edge line")?;
        let f: Vec<&str> = t.split_whitespace().collect();
        let [id, a, b, bw] = f.as_slice() else {
            return err(l, "edge line needs `<id> <from> <to> <bw>`");
        };
        let id: usize = number(l, id, "edge id")?;
        if id != edges.len() {
            return err(l, format!("expected edge id {}, found {id}", edges.len()));
        }
        let a: usize = number(l, a, "endpoint")?;
        let b: usize = number(l, b, "endpoint")?;
        for e in [a, b] {
            if e >= n {
                return err(l, format!("unknown endpoint {e}"));
            }
        }
        edges.push((a, b, number(l, bw, "bandwidth")?, l));
    }
    if edges.len() != m {
        return err(
            hline,
            format!("header declares {m} edges, section has {}", edges.len()),
        );
    }
    Ok(Block { nodes, edges })
}

fn write_block<W: Write>(
    w: &mut W,
    nodes: impl ExactSizeIterator<Item = (Position, u64)>,
    edges: impl ExactSizeIterator<Item = (usize, usize, u64)>,
) -> io::Result<()> {
    writeln!(
        w,
        "Topology: ( {} Nodes, {} Edges )",
        nodes.len(),
        edges.len()
    )?;
    writeln!(w, "Nodes:")?;
    for (i, (p, cpu)) in nodes.enumerate() {
        writeln!(w, "{i} {:.6} {:.6} {cpu}", p.x, p.y)?;
    }
    writeln!(w, "Edges:")?;
    for (i, (a, b, bw)) in edges.enumerate() {
        writeln!(w, "{i} {a} {b} {bw}")?;
    }
    Ok(())
}

pub fn write_topology<W: Write>(w: &mut W, sn: &SubstrateNetwork) -> io::Result<()> {
    write_block(
        w,
        sn.nodes().iter().map(|n| (n.pos, n.cpu_capacity)),
        sn.links()
            .iter()
            .map(|l| (l.endpoints.0.index(), l.endpoints.1.index(), l.bw_capacity)),
    )
}

pub fn topology_to_string(sn: &SubstrateNetwork) -> String {
    let mut buf = Vec::new();
    write_topology(&mut buf, sn).expect("writing to memory");
    String::from_utf8(buf).expect("output is ASCII")
}

/// Parses a substrate. Residuals start at the capacities.
pub fn read_topology(text: &str) -> Result<SubstrateNetwork, ParseError> {
    let mut lines = Lines::new(text);
    let sn = substrate_from(read_block(&mut lines)?)?;
    expect_end(&mut lines)?;
    Ok(sn)
}

fn expect_end(lines: &mut Lines<'_>) -> Result<(), ParseError> {
    match lines.peek() {
        Some(&(l, _)) => err(l, "unexpected content after topology"),
        None => Ok(()),
    }
}

fn substrate_from(block: Block) -> Result<SubstrateNetwork, ParseError> {
    let mut sn = SubstrateNetwork::new();
    for (p, cpu, _) in block.nodes {
        sn.add_node(cpu, p);
    }
    for (a, b, bw, l) in block.edges {
        if let Err(e) = sn.add_link(NodeId::from(a), NodeId::from(b), bw) {
            return err(l, e.to_string());
        }
    }
    Ok(sn)
}

pub fn write_virtual<W: Write>(w: &mut W, vn: &VirtualNetwork) -> io::Result<()> {
    write_block(
        w,
        vn.nodes().iter().map(|n| (n.pos, n.cpu_demand)),
        vn.links()
            .iter()
            .map(|l| (l.endpoints.0.index(), l.endpoints.1.index(), l.bw_demand)),
    )
}

pub fn virtual_to_string(vn: &VirtualNetwork) -> String {
    let mut buf = Vec::new();
    write_virtual(&mut buf, vn).expect("writing to memory");
    String::from_utf8(buf).expect("output is ASCII")
}

pub fn read_virtual(text: &str) -> Result<VirtualNetwork, ParseError> {
    let mut lines = Lines::new(text);
    let vn = virtual_from(read_block(&mut lines)?)?;
    expect_end(&mut lines)?;
    Ok(vn)
}

fn virtual_from(block: Block) -> Result<VirtualNetwork, ParseError> {
    let mut vn = VirtualNetwork::new();
    for (p, cpu, l) in block.nodes {
        if let Err(e) = vn.add_node(cpu, p) {
            return err(l, e.to_string());
        }
    }
    for (a, b, bw, l) in block.edges {
        if let Err(e) = vn.add_link(VNodeId::from(a), VNodeId::from(b), bw) {
            return err(l, e.to_string());
        }
    }
    Ok(vn)
}

/// A workload together with the seed it was generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadFile {
    pub seed: u64,
    pub requests: Vec<VNRequest>,
}

/// Times are written in shortest round-trip form, so reading restores
/// them exactly.
pub fn write_workload<W: Write>(w: &mut W, wl: &WorkloadFile) -> io::Result<()> {
    writeln!(
        w,
        "Workload: ( {} Requests, seed {} )",
        wl.requests.len(),
        wl.seed
    )?;
    for (i, r) in wl.requests.iter().enumerate() {
        writeln!(w, "Request: {i} {:?} {:?}", r.arrival_time, r.lifetime)?;
        write_virtual(w, &r.vn)?;
    }
    Ok(())
}

pub fn workload_to_string(wl: &WorkloadFile) -> String {
    let mut buf = Vec::new();
    write_workload(&mut buf, wl).expect("writing to memory");
    String::from_utf8(buf).expect("output is ASCII")
}

pub fn read_workload(text: &str) -> Result<WorkloadFile, ParseError> {
    let mut lines = Lines::new(text);
    let (hline, htext) = lines.next("workload header")?;
    let (count, seed) = header(hline, htext, "Workload:", ["Requests", "seed"])?;
    let count: usize = number(hline, count, "request count")?;
    let seed: u64 = number(hline, seed, "seed")?;

    let mut requests: Vec<VNRequest> = Vec::with_capacity(count);
    while lines.peek().is_some() {
        let (l, t) = lines.next("request line")?;
        let f: Vec<&str> = t.split_whitespace().collect();
        let ["Request:", id, arrival, lifetime] = f.as_slice() else {
            return err(l, "expected `Request: <id> <arrival> <lifetime>`");
        };
        let id: usize = number(l, id, "request id")?;
        if id != requests.len() {
            return err(
                l,
                format!("expected request id {}, found {id}", requests.len()),
            );
        }
        let arrival: f64 = number(l, arrival, "arrival time")?;
        let lifetime: f64 = number(l, lifetime, "lifetime")?;
        if !arrival.is_finite() || arrival < 0.0 {
            return err(l, "arrival time must be finite and non-negative");
        }
        if let Some(prev) = requests.last() {
            if arrival < prev.arrival_time {
                return err(l, "requests must be ordered by arrival time");
            }
        }
        let vn = virtual_from(read_block(&mut lines)?)?;
        match VNRequest::new(vn, arrival, lifetime) {
            Ok(r) => requests.push(r),
            Err(e) => return err(l, e.to_string()),
        }
    }
    if requests.len() != count {
        return err(
            hline,
            format!(
                "header declares {count} requests, file has {}",
                requests.len()
            ),
        );
    }
    Ok(WorkloadFile { seed, requests })
}

#[derive(Serialize)]
struct TraceRow<'a> {
    time: f64,
    event: &'a str,
    request: usize,
    revenue_rate: u64,
    cost_rate: u64,
    snf: f64,
    cpu_utilization: f64,
    bw_utilization: f64,
    active_nodes: usize,
    active_requests: usize,
    cpu_allocated: u64,
    cpu_residual: u64,
    bw_allocated: u64,
    bw_residual: u64,
}

/// Column order of [`export_trace`].
pub const TRACE_COLUMNS: [&str; 14] = [
    "time",
    "event",
    "request",
    "revenue_rate",
    "cost_rate",
    "snf",
    "cpu_utilization",
    "bw_utilization",
    "active_nodes",
    "active_requests",
    "cpu_allocated",
    "cpu_residual",
    "bw_allocated",
    "bw_residual",
];

/// One CSV row per sample under a header row. Reals are written in
/// shortest round-trip form.
pub fn export_trace<W: Write>(w: W, trace: &SimTrace) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(TRACE_COLUMNS)?;
    for s in &trace.samples {
        out.serialize(TraceRow {
            time: s.time,
            event: match s.event {
                crate::simulator::EventKind::Arrival => "arrival",
                crate::simulator::EventKind::Departure => "departure",
            },
            request: s.request,
            revenue_rate: s.revenue_rate,
            cost_rate: s.cost_rate,
            snf: s.snf,
            cpu_utilization: s.cpu_utilization,
            bw_utilization: s.bw_utilization,
            active_nodes: s.active_nodes,
            active_requests: s.active_requests,
            cpu_allocated: s.cpu_allocated,
            cpu_residual: s.cpu_residual,
            bw_allocated: s.bw_allocated,
            bw_residual: s.bw_residual,
        })?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RequestRow<'a> {
    request: usize,
    arrival_time: f64,
    lifetime: f64,
    accepted: bool,
    revenue: u64,
    cost: u64,
    cpu_demand: u64,
    bw_demand: u64,
    rejection: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve_time_ms: Option<f64>,
}

/// One CSV row per request. Solve times are wall-clock and therefore
/// only written when `include_timing` is set.
pub fn export_requests<W: Write>(
    w: W,
    trace: &SimTrace,
    include_timing: bool,
) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let mut header = vec![
        "request",
        "arrival_time",
        "lifetime",
        "accepted",
        "revenue",
        "cost",
        "cpu_demand",
        "bw_demand",
        "rejection",
    ];
    if include_timing {
        header.push("solve_time_ms");
    }
    out.write_record(&header)?;
    for r in &trace.records {
        out.serialize(RequestRow {
            request: r.id,
            arrival_time: r.arrival_time,
            lifetime: r.lifetime,
            accepted: r.accepted,
            revenue: r.revenue,
            cost: r.cost,
            cpu_demand: r.cpu_demand,
            bw_demand: r.bw_demand,
            rejection: r.rejection.map_or("", |x| x.as_str()),
            solve_time_ms: include_timing.then_some(r.solve_time.as_secs_f64() * 1e3),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `key = value` lines, reals with six decimals. The output is valid TOML
/// and reads back with [`read_summary`]. The mean solve time is written
/// only when `include_timing` is set.
pub fn export_summary<W: Write>(w: &mut W, s: &SimSummary, include_timing: bool) -> io::Result<()> {
    writeln!(w, "solver = \"{}\"", s.solver.escape_default())?;
    writeln!(w, "seed = {}", s.seed)?;
    writeln!(w, "horizon = {:.6}", s.horizon)?;
    writeln!(w, "requests = {}", s.requests)?;
    writeln!(w, "accepted = {}", s.accepted)?;
    let reals = [
        ("long_term_avg_revenue", s.long_term_avg_revenue),
        ("long_term_avg_cost", s.long_term_avg_cost),
        ("acceptance_ratio", s.acceptance_ratio),
        ("cpu_acceptance_ratio", s.cpu_acceptance_ratio),
        ("bw_acceptance_ratio", s.bw_acceptance_ratio),
        ("revenue_cost_ratio", s.revenue_cost_ratio),
        ("long_term_avg_snf", s.long_term_avg_snf),
    ];
    for (k, v) in reals {
        writeln!(w, "{k} = {v:.6}")?;
    }
    if let (true, Some(t)) = (include_timing, s.mean_solve_time_ms) {
        writeln!(w, "mean_solve_time_ms = {t:.6}")?;
    }
    Ok(())
}

pub fn summary_to_string(s: &SimSummary, include_timing: bool) -> String {
    let mut buf = Vec::new();
    export_summary(&mut buf, s, include_timing).expect("writing to memory");
    String::from_utf8(buf).expect("output is UTF-8")
}

#[derive(Debug, Error)]
#[error("invalid summary: {0}")]
pub struct SummaryError(#[from] toml::de::Error);

pub fn read_summary(text: &str) -> Result<SimSummary, SummaryError> {
    Ok(toml::from_str(text)?)
}
