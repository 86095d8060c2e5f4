use super::lexer::{lex, Tok, Token};
use super::{ErrorKind, ParseError, SourceSpan, MAX_ERRORS};
use crate::geometry::{BendLine, FlexZone, GridIndex, Point2, Stackup, DEFAULT_PITCH};
use crate::layout::{
    validate_design, BoardDesign, ElementKind, Layer, Outline, Socket, StructuralCode,
    StructuralError, Trace, Via, DEFAULT_MARGIN, DEFAULT_SOCKET_DEPTH, DEFAULT_SOCKET_RADIUS,
    DEFAULT_TRACE_HEIGHT, DEFAULT_TRACE_WIDTH, DEFAULT_VIA_RADIUS,
};
use std::collections::HashMap;

#[derive(Debug, Clone)]
enum ArgKind {
    Ident(String),
    Number(String),
    Str(String),
    Pair(String, String),
}

#[derive(Debug, Clone)]
struct Arg {
    kind: ArgKind,
    span: SourceSpan,
}

#[derive(Debug)]
struct Stmt {
    key: String,
    key_span: SourceSpan,
    args: Vec<Arg>,
    block: Option<Vec<Stmt>>,
}

/// Deepest block nesting accepted; the grammar itself needs two levels.
const MAX_DEPTH: usize = 8;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    errs: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, span: SourceSpan, message: String, expected: &[&str]) {
        self.errs.push(ParseError::new(
            ErrorKind::Syntax,
            span,
            message,
            expected.iter().map(|s| s.to_string()).collect(),
        ));
    }

    /// Skips to the end of the current statement, stepping over nested blocks.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek().tok {
                Tok::Eof => return,
                Tok::RBrace if depth == 0 => return,
                Tok::Newline | Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            self.bump();
        }
    }

    fn statements(&mut self, nested: bool) -> Vec<Stmt> {
        let mut out = Vec::new();
        loop {
            if self.errs.len() > MAX_ERRORS {
                return out;
            }
            let t = self.peek().clone();
            match t.tok {
                Tok::Newline | Tok::Semi => {
                    self.bump();
                }
                Tok::RBrace if nested => return out,
                Tok::Eof => return out,
                Tok::RBrace => {
                    self.bump();
                    self.error(t.span, "unmatched `}`".into(), &[]);
                }
                Tok::Ident(key) => {
                    self.bump();
                    if let Some(s) = self.statement(key, t.span) {
                        out.push(s);
                    }
                }
                other => {
                    self.error(
                        t.span,
                        format!("expected a key, found {}", other.describe()),
                        &["key"],
                    );
                    self.bump();
                    self.recover();
                }
            }
        }
    }

    fn statement(&mut self, key: String, key_span: SourceSpan) -> Option<Stmt> {
        let mut args = Vec::new();
        loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::Ident(s) => {
                    self.bump();
                    args.push(Arg {
                        kind: ArgKind::Ident(s),
                        span: t.span,
                    });
                }
                Tok::Number(s) => {
                    self.bump();
                    args.push(Arg {
                        kind: ArgKind::Number(s),
                        span: t.span,
                    });
                }
                Tok::Str(s) => {
                    self.bump();
                    args.push(Arg {
                        kind: ArgKind::Str(s),
                        span: t.span,
                    });
                }
                Tok::LParen => {
                    self.bump();
                    match self.pair(t.span) {
                        Some(a) => args.push(a),
                        None => {
                            self.recover();
                            return None;
                        }
                    }
                }
                Tok::LBrace => {
                    if self.depth >= MAX_DEPTH {
                        self.error(t.span, "blocks are nested too deeply".into(), &[]);
                        self.recover();
                        return None;
                    }
                    self.bump();
                    self.depth += 1;
                    let body = self.statements(true);
                    self.depth -= 1;
                    let close = self.peek().clone();
                    if close.tok == Tok::RBrace {
                        self.bump();
                    } else {
                        self.error(
                            close.span,
                            format!(
                                "expected `}}` to close `{key}`, found {}",
                                close.tok.describe()
                            ),
                            &["}"],
                        );
                        return None;
                    }
                    let end = self.peek().clone();
                    match end.tok {
                        Tok::Newline | Tok::Semi => {
                            self.bump();
                        }
                        Tok::RBrace | Tok::Eof => {}
                        other => {
                            self.error(
                                end.span,
                                format!(
                                    "expected end of statement after block, found {}",
                                    other.describe()
                                ),
                                &[";", "end of line"],
                            );
                            self.recover();
                        }
                    }
                    return Some(Stmt {
                        key,
                        key_span,
                        args,
                        block: Some(body),
                    });
                }
                Tok::Newline | Tok::Semi => {
                    self.bump();
                    return Some(Stmt {
                        key,
                        key_span,
                        args,
                        block: None,
                    });
                }
                Tok::RBrace | Tok::Eof => {
                    return Some(Stmt {
                        key,
                        key_span,
                        args,
                        block: None,
                    })
                }
                other => {
                    self.error(
                        t.span,
                        format!("unexpected {} in `{key}`", other.describe()),
                        &[],
                    );
                    self.recover();
                    return None;
                }
            }
        }
    }

    /// `(a,b)` after the opening parenthesis has been consumed.
    fn pair(&mut self, open: SourceSpan) -> Option<Arg> {
        let mut nums = Vec::new();
        for closing in [false, true] {
            let t = self.peek().clone();
            match t.tok {
                Tok::Number(s) => {
                    self.bump();
                    nums.push(s);
                }
                other => {
                    self.error(
                        t.span,
                        format!("expected a number in pair, found {}", other.describe()),
                        &["number"],
                    );
                    return None;
                }
            }
            let t = self.peek().clone();
            let (ok, want) = if closing {
                (t.tok == Tok::RParen, ")")
            } else {
                (t.tok == Tok::Comma, ",")
            };
            if !ok {
                self.error(
                    t.span,
                    format!("expected `{want}` in pair, found {}", t.tok.describe()),
                    &[want],
                );
                return None;
            }
            let close = self.bump();
            if closing {
                let length = if close.span.line == open.line {
                    close.span.column + 1 - open.column
                } else {
                    1
                };
                let b = nums.pop().unwrap();
                let a = nums.pop().unwrap();
                return Some(Arg {
                    kind: ArgKind::Pair(a, b),
                    span: SourceSpan { length, ..open },
                });
            }
        }
        unreachable!()
    }
}

/// Source locations of every addressable piece of a board, for re-spanning
/// structural errors.
#[derive(Default)]
struct SpanTable {
    board: Option<SourceSpan>,
    board_fields: HashMap<String, SourceSpan>,
    /// Every declaration of each element, in source order.
    elements: HashMap<(ElementKind, String), Vec<ElementSpans>>,
}

struct ElementSpans {
    header: SourceSpan,
    id: SourceSpan,
    fields: HashMap<String, (SourceSpan, Vec<SourceSpan>)>,
}

impl SpanTable {
    /// `occurrence` picks among repeated declarations of the same id.
    fn locate(&self, e: &StructuralError, occurrence: usize) -> SourceSpan {
        let fallback = self.board.unwrap_or(SourceSpan {
            line: 1,
            column: 1,
            length: 0,
        });
        let field = e.field.as_deref().unwrap_or("");
        match &e.element {
            Some(key) => {
                let Some(decls) = self.elements.get(key) else {
                    return fallback;
                };
                let el = &decls[occurrence.min(decls.len() - 1)];
                if field == "id" {
                    return el.id;
                }
                match el.fields.get(field) {
                    Some((stmt, args)) => e
                        .position
                        .and_then(|p| args.get(p).copied())
                        .unwrap_or(*stmt),
                    None => el.header,
                }
            }
            None => self.board_fields.get(field).copied().unwrap_or(fallback),
        }
    }
}

struct Semantics<'a> {
    errs: &'a mut Vec<ParseError>,
    spans: SpanTable,
}

type Fields<'s> = HashMap<&'s str, &'s Stmt>;

impl<'a> Semantics<'a> {
    fn error(&mut self, span: SourceSpan, message: String, expected: &[&str]) {
        self.errs.push(ParseError::new(
            ErrorKind::Syntax,
            span,
            message,
            expected.iter().map(|s| s.to_string()).collect(),
        ));
    }

    /// Collects key statements, rejecting unknown, duplicate and block-bearing keys.
    fn fields<'s>(&mut self, ctx: &str, stmts: &'s [Stmt], allowed: &[&str]) -> Fields<'s> {
        let mut out: Fields<'s> = HashMap::new();
        for s in stmts {
            if !allowed.contains(&s.key.as_str()) {
                self.error(
                    s.key_span,
                    format!("unknown key `{}` in {ctx}", s.key),
                    allowed,
                );
            } else if out.contains_key(s.key.as_str()) {
                self.error(
                    s.key_span,
                    format!("duplicate key `{}` in {ctx}", s.key),
                    &[],
                );
            } else if s.block.is_some() {
                self.error(
                    s.key_span,
                    format!("`{}` does not take a block", s.key),
                    &[],
                );
            } else {
                out.insert(&s.key, s);
            }
        }
        out
    }

    fn arity(&mut self, s: &Stmt, n: usize, what: &str) -> bool {
        if s.args.len() != n {
            self.error(
                s.key_span,
                format!("`{}` takes {what}, got {} argument(s)", s.key, s.args.len()),
                &[],
            );
            return false;
        }
        true
    }

    fn number(&mut self, a: &Arg) -> Option<f64> {
        match &a.kind {
            ArgKind::Number(s) => self.float(s, a.span),
            _ => {
                self.error(a.span, "expected a number".into(), &["number"]);
                None
            }
        }
    }

    fn float(&mut self, s: &str, span: SourceSpan) -> Option<f64> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.error(span, format!("number `{s}` is out of range"), &[]);
                None
            }
        }
    }

    fn integer(&mut self, s: &str, span: SourceSpan) -> Option<i64> {
        if s.contains(['.', 'e']) {
            self.error(
                span,
                format!("grid coordinate `{s}` must be an integer"),
                &["integer"],
            );
            return None;
        }
        match s.parse::<i64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(span, format!("integer `{s}` is out of range"), &[]);
                None
            }
        }
    }

    fn single_number(&mut self, f: &Fields, key: &str, default: f64) -> Option<f64> {
        match f.get(key) {
            None => Some(default),
            Some(s) => {
                if !self.arity(s, 1, "1 number") {
                    return None;
                }
                self.number(&s.args[0])
            }
        }
    }

    fn point(&mut self, a: &Arg) -> Option<Point2> {
        match &a.kind {
            ArgKind::Pair(x, y) => {
                let x = self.float(x, a.span);
                let y = self.float(y, a.span);
                Some(Point2::new(x?, y?))
            }
            _ => {
                self.error(a.span, "expected a point `(x,y)`".into(), &["(x,y)"]);
                None
            }
        }
    }

    fn index(&mut self, a: &Arg) -> Option<GridIndex> {
        match &a.kind {
            ArgKind::Pair(u, v) => {
                let u = self.integer(u, a.span);
                let v = self.integer(v, a.span);
                Some(GridIndex::new(u?, v?))
            }
            _ => {
                self.error(a.span, "expected a grid index `(u,v)`".into(), &["(u,v)"]);
                None
            }
        }
    }

    fn layer(&mut self, f: &Fields) -> Option<Layer> {
        let Some(s) = f.get("layer") else {
            return Some(Layer::Top);
        };
        if !self.arity(s, 1, "`top` or `bottom`") {
            return None;
        }
        match &s.args[0].kind {
            ArgKind::Ident(l) if l == "top" => Some(Layer::Top),
            ArgKind::Ident(l) if l == "bottom" => Some(Layer::Bottom),
            _ => {
                self.error(
                    s.args[0].span,
                    "expected a layer".into(),
                    &["top", "bottom"],
                );
                None
            }
        }
    }

    fn required<'s>(
        &mut self,
        f: &Fields<'s>,
        key: &str,
        header: SourceSpan,
        ctx: &str,
    ) -> Option<&'s Stmt> {
        let s = f.get(key).copied();
        if s.is_none() {
            self.error(header, format!("{ctx} is missing `{key}`"), &[key]);
        }
        s
    }

    fn record(
        &mut self,
        kind: ElementKind,
        id: &str,
        header: SourceSpan,
        id_span: SourceSpan,
        f: &Fields,
    ) {
        let fields = f
            .iter()
            .map(|(k, s)| {
                (
                    k.to_string(),
                    (s.key_span, s.args.iter().map(|a| a.span).collect()),
                )
            })
            .collect();
        self.spans
            .elements
            .entry((kind, id.to_string()))
            .or_default()
            .push(ElementSpans {
                header,
                id: id_span,
                fields,
            });
    }

    fn board(&mut self, stmt: &Stmt, body: &[Stmt]) -> Option<BoardDesign> {
        const ELEMENTS: [&str; 5] = ["trace", "via", "socket", "bend", "flex"];
        const KEYS: [&str; 10] = [
            "name", "outline", "pitch", "margin", "stackup", "trace", "via", "socket", "bend",
            "flex",
        ];
        self.spans.board = Some(stmt.key_span);
        let (scalars, elements): (Vec<&Stmt>, Vec<&Stmt>) = body
            .iter()
            .partition(|s| !ELEMENTS.contains(&s.key.as_str()));
        let mut f: Fields = HashMap::new();
        for s in scalars {
            if !KEYS.contains(&s.key.as_str()) {
                self.error(
                    s.key_span,
                    format!("unknown key `{}` in board", s.key),
                    &KEYS,
                );
            } else if f.contains_key(s.key.as_str()) {
                self.error(
                    s.key_span,
                    format!("duplicate key `{}` in board", s.key),
                    &[],
                );
            } else if s.block.is_some() {
                self.error(
                    s.key_span,
                    format!("`{}` does not take a block", s.key),
                    &[],
                );
            } else {
                f.insert(&s.key, s);
                self.spans.board_fields.insert(s.key.clone(), s.key_span);
            }
        }

        let name = match f.get("name") {
            None => Some("board".to_string()),
            Some(s) => {
                if self.arity(s, 1, "1 string") {
                    match &s.args[0].kind {
                        ArgKind::Str(n) => Some(n.clone()),
                        _ => {
                            self.error(s.args[0].span, "expected a string".into(), &["string"]);
                            None
                        }
                    }
                } else {
                    None
                }
            }
        };
        let outline = self
            .required(&f, "outline", stmt.key_span, "board")
            .and_then(|s| self.outline(s));
        let pitch = self.single_number(&f, "pitch", DEFAULT_PITCH);
        let margin = self.single_number(&f, "margin", DEFAULT_MARGIN);
        let stackup = self
            .required(&f, "stackup", stmt.key_span, "board")
            .and_then(|s| {
                if !self.arity(s, 4, "4 layer heights") {
                    return None;
                }
                let h: Vec<Option<f64>> = s.args.iter().map(|a| self.number(a)).collect();
                let h: Option<Vec<f64>> = h.into_iter().collect();
                h.map(|h| Stackup {
                    layer_heights: [h[0], h[1], h[2], h[3]],
                })
            });

        let mut board = BoardDesign::new(
            "board",
            Outline::Rect {
                width: 1.0,
                height: 1.0,
            },
            Stackup::uniform(0.3),
        );
        let mut ok = true;
        for e in elements {
            ok &= self.element(e, &mut board).is_some();
        }
        board.name = name?;
        board.outline = outline?;
        board.pitch = pitch?;
        board.margin = margin?;
        board.stackup = stackup?;
        ok.then_some(board)
    }

    fn outline(&mut self, s: &Stmt) -> Option<Outline> {
        let Some(first) = s.args.first() else {
            self.error(
                s.key_span,
                "`outline` needs a shape".into(),
                &["rect", "polygon"],
            );
            return None;
        };
        match &first.kind {
            ArgKind::Ident(k) if k == "rect" => {
                if s.args.len() != 3 {
                    self.error(
                        s.key_span,
                        "`outline rect` takes a width and a height".into(),
                        &[],
                    );
                    return None;
                }
                let w = self.number(&s.args[1]);
                let h = self.number(&s.args[2]);
                Some(Outline::Rect {
                    width: w?,
                    height: h?,
                })
            }
            ArgKind::Ident(k) if k == "polygon" => {
                let pts: Vec<Option<Point2>> = s.args[1..].iter().map(|a| self.point(a)).collect();
                let vertices: Vec<Point2> = pts.into_iter().collect::<Option<_>>()?;
                if vertices.is_empty() {
                    self.error(
                        s.key_span,
                        "`outline polygon` needs vertices".into(),
                        &["(x,y)"],
                    );
                    return None;
                }
                Some(Outline::Polygon { vertices })
            }
            _ => {
                self.error(
                    first.span,
                    "unknown outline shape".into(),
                    &["rect", "polygon"],
                );
                None
            }
        }
    }

    fn element(&mut self, s: &Stmt, board: &mut BoardDesign) -> Option<()> {
        let kind = ElementKind::parse(&s.key).expect("element key");
        let id = match s.args.as_slice() {
            [Arg {
                kind: ArgKind::Ident(id),
                span,
            }] => (id.clone(), *span),
            _ => {
                self.error(
                    s.key_span,
                    format!("`{}` takes exactly one identifier", s.key),
                    &["identifier"],
                );
                return None;
            }
        };
        let Some(body) = &s.block else {
            self.error(
                s.key_span,
                format!("`{} {}` needs a `{{ ... }}` block", s.key, id.0),
                &["{"],
            );
            return None;
        };
        let ctx = format!("{} `{}`", s.key, id.0);
        let header = s.key_span;
        match kind {
            ElementKind::Trace => {
                let f = self.fields(
                    &ctx,
                    body,
                    &["layer", "path", "width", "height", "plated", "current"],
                );
                self.record(kind, &id.0, header, id.1, &f);
                let layer = self.layer(&f);
                let path = self.required(&f, "path", header, &ctx).and_then(|p| {
                    let v: Vec<Option<GridIndex>> = p.args.iter().map(|a| self.index(a)).collect();
                    v.into_iter().collect::<Option<Vec<_>>>()
                });
                let width = self.single_number(&f, "width", DEFAULT_TRACE_WIDTH);
                let height = self.single_number(&f, "height", DEFAULT_TRACE_HEIGHT);
                let plated = match f.get("plated") {
                    None => Some(true),
                    Some(p) => match p.args.as_slice() {
                        [Arg {
                            kind: ArgKind::Ident(v),
                            ..
                        }] if v == "true" => Some(true),
                        [Arg {
                            kind: ArgKind::Ident(v),
                            ..
                        }] if v == "false" => Some(false),
                        _ => {
                            self.error(
                                p.key_span,
                                "`plated` takes `true` or `false`".into(),
                                &["true", "false"],
                            );
                            None
                        }
                    },
                };
                let current = match f.get("current") {
                    None => Some(None),
                    Some(_) => self.single_number(&f, "current", 0.0).map(Some),
                };
                board.traces.push(Trace {
                    id: id.0,
                    layer: layer?,
                    path: path?,
                    width: width?,
                    height: height?,
                    plated: plated?,
                    current: current?,
                });
            }
            ElementKind::Via => {
                let f = self.fields(&ctx, body, &["at", "radius"]);
                self.record(kind, &id.0, header, id.1, &f);
                let at = self.at(&f, header, &ctx);
                let radius = self.single_number(&f, "radius", DEFAULT_VIA_RADIUS);
                board.vias.push(Via {
                    id: id.0,
                    at: at?,
                    radius: radius?,
                });
            }
            ElementKind::Socket => {
                let f = self.fields(&ctx, body, &["at", "radius", "depth", "layer"]);
                self.record(kind, &id.0, header, id.1, &f);
                let at = self.at(&f, header, &ctx);
                let radius = self.single_number(&f, "radius", DEFAULT_SOCKET_RADIUS);
                let depth = self.single_number(&f, "depth", DEFAULT_SOCKET_DEPTH);
                let layer = self.layer(&f);
                board.sockets.push(Socket {
                    id: id.0,
                    at: at?,
                    radius: radius?,
                    depth: depth?,
                    layer: layer?,
                });
            }
            ElementKind::Bend => {
                let f = self.fields(&ctx, body, &["axis", "angle", "radius", "sequence"]);
                self.record(kind, &id.0, header, id.1, &f);
                let axis = self.required(&f, "axis", header, &ctx).and_then(|a| {
                    if !self.arity(a, 2, "2 points") {
                        return None;
                    }
                    let p = self.point(&a.args[0]);
                    let q = self.point(&a.args[1]);
                    Some((p?, q?))
                });
                let angle = self
                    .required(&f, "angle", header, &ctx)
                    .and_then(|_| self.single_number(&f, "angle", 0.0));
                let radius = self.single_number(&f, "radius", crate::geometry::DEFAULT_BEND_RADIUS);
                let sequence = match f.get("sequence") {
                    None => Some(0),
                    Some(s) => match s.args.as_slice() {
                        [Arg {
                            kind: ArgKind::Number(n),
                            span,
                        }] => self.integer(n, *span),
                        _ => {
                            self.error(
                                s.key_span,
                                "`sequence` takes 1 integer".into(),
                                &["integer"],
                            );
                            None
                        }
                    },
                };
                let (from, to) = axis?;
                board.bends.push(BendLine {
                    id: id.0,
                    from,
                    to,
                    angle: angle?,
                    radius: radius?,
                    sequence: sequence?,
                });
            }
            ElementKind::Flex => {
                let f = self.fields(&ctx, body, &["center", "radius", "deflection", "direction"]);
                self.record(kind, &id.0, header, id.1, &f);
                let center = self.required(&f, "center", header, &ctx).and_then(|c| {
                    if !self.arity(c, 1, "1 point") {
                        return None;
                    }
                    self.point(&c.args[0])
                });
                let radius = self
                    .required(&f, "radius", header, &ctx)
                    .and_then(|_| self.single_number(&f, "radius", 0.0));
                let deflection = self
                    .required(&f, "deflection", header, &ctx)
                    .and_then(|_| self.single_number(&f, "deflection", 0.0));
                let direction = match f.get("direction") {
                    None => Some(None),
                    Some(_) => self.single_number(&f, "direction", 0.0).map(Some),
                };
                board.flex_zones.push(FlexZone {
                    id: id.0,
                    center: center?,
                    radius: radius?,
                    expected_deflection: deflection?,
                    direction: direction?,
                });
            }
        }
        Some(())
    }

    fn at(&mut self, f: &Fields, header: SourceSpan, ctx: &str) -> Option<GridIndex> {
        let s = self.required(f, "at", header, ctx)?;
        if !self.arity(s, 1, "1 grid index") {
            return None;
        }
        self.index(&s.args[0])
    }
}

/// Parses `.tcb` text. On failure every independent error found is returned,
/// ordered by position; no partial board is produced.
pub fn parse(text: &str) -> Result<BoardDesign, Vec<ParseError>> {
    let (toks, mut errs) = lex(text);
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
        errs: Vec::new(),
    };
    let top = p.statements(false);
    errs.append(&mut p.errs);

    let mut sem = Semantics {
        errs: &mut errs,
        spans: SpanTable::default(),
    };
    let mut board = None;
    let mut boards = top.iter().filter(|s| s.key == "board");
    match boards.next() {
        None => {
            let span = top.first().map(|s| s.key_span).unwrap_or(SourceSpan {
                line: 1,
                column: 1,
                length: 0,
            });
            // Only report the missing board when nothing else explains it.
            if !top.is_empty() || sem.errs.is_empty() {
                sem.error(span, "expected a `board` block".into(), &["board"]);
            }
        }
        Some(b) => {
            for extra in boards {
                sem.error(
                    extra.key_span,
                    "only one `board` block is allowed".into(),
                    &[],
                );
            }
            for other in top.iter().filter(|s| s.key != "board") {
                sem.error(
                    other.key_span,
                    format!("unknown top-level key `{}`", other.key),
                    &["board"],
                );
            }
            if !b.args.is_empty() {
                sem.error(b.key_span, "`board` takes no arguments".into(), &["{"]);
            }
            match &b.block {
                None => sem.error(b.key_span, "`board` needs a `{ ... }` block".into(), &["{"]),
                Some(body) => board = sem.board(b, body),
            }
        }
    }
    let spans = std::mem::take(&mut sem.spans);

    if errs.is_empty() {
        let mut board = board.expect("board is built when no errors were reported");
        board.canonicalize();
        let structural = validate_design(&board);
        if structural.is_empty() {
            return Ok(board);
        }
        let mut repeats: HashMap<&(ElementKind, String), usize> = HashMap::new();
        for e in &structural {
            let occurrence = match (&e.code, &e.element) {
                (StructuralCode::DuplicateId, Some(key)) => {
                    let n = repeats.entry(key).or_insert(0);
                    *n += 1;
                    *n
                }
                _ => 0,
            };
            errs.push(ParseError::new(
                ErrorKind::Semantic,
                spans.locate(e, occurrence),
                e.to_string(),
                Vec::new(),
            ));
        }
    }
    errs.sort_by_key(|e| (e.span.line, e.span.column));
    errs.truncate(MAX_ERRORS);
    Err(errs)
}

/// Parses raw bytes, reporting invalid UTF-8 as a lexical error.
pub fn parse_bytes(bytes: &[u8]) -> Result<BoardDesign, Vec<ParseError>> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse(s),
        Err(e) => {
            let prefix = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = prefix.matches('\n').count() + 1;
            let column = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![ParseError::new(
                ErrorKind::Lexical,
                SourceSpan {
                    line,
                    column,
                    length: 1,
                },
                "input is not valid UTF-8".into(),
                Vec::new(),
            )])
        }
    }
}
