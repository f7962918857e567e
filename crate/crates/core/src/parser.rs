//! Recursive-descent parser for the supported C++ subset.
//!
//! Supported: namespaces (nested), class/struct declarations with single and
//! multiple inheritance, attributes with initializers, member functions with
//! bodies, free functions and namespace-level variables, access specifiers,
//! the modifier set, class/function templates, operator overloads and
//! destructors. Preprocessor directives and `using` lines are stripped
//! without expansion. Lambdas, local classes, and nested classes are
//! rejected with an unsupported-construct error naming the construct.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lexer::{tokenize, LexError, Token, TokenKind};
use crate::model::{
    AttributeDecl, ClassDecl, ClassKind, CodeModel, DeclaredVariable, Generalization, Modifier,
    OperationDecl, Parameter, SourceLocation, Statement, StatementKind, TypeRef, Visibility,
    GLOBALS_CLASS_NAME,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Lex(LexError),
    Syntax {
        message: String,
        location: SourceLocation,
    },
    Unsupported {
        construct: String,
        location: SourceLocation,
    },
}

impl ParseError {
    pub fn location(&self) -> SourceLocation {
        match self {
            ParseError::Lex(e) => e.location,
            ParseError::Syntax { location, .. } | ParseError::Unsupported { location, .. } => {
                *location
            }
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Lex(e) => e.fmt(f),
            ParseError::Syntax { message, location } => {
                write!(f, "parse error at {location}: {message}")
            }
            ParseError::Unsupported {
                construct,
                location,
            } => {
                write!(f, "unsupported construct at {location}: {construct}")
            }
        }
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError::Lex(e)
    }
}

const BUILTIN_TYPE_WORDS: &[&str] = &[
    "void", "bool", "char", "wchar_t", "short", "int", "long", "float", "double", "signed",
    "unsigned", "auto",
];

/// Joins token texts with canonical spacing: single spaces between tokens,
/// none around `::`, `(`, `)`, member access, or subscripts, and no
/// trailing `;`. Gives stable statement equality across formatting changes.
pub(crate) fn normalize_tokens(tokens: &[Token]) -> String {
    let mut slice = tokens;
    while let Some(last) = slice.last() {
        if last.text == ";" {
            slice = &slice[..slice.len() - 1];
        } else {
            break;
        }
    }
    let no_space_before = [")", ",", ";", "::", "(", ".", "->", "[", "]", "++", "--"];
    let no_space_after = ["(", "::", ".", "->", "[", ","];
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for tok in slice {
        let text = tok.text.as_str();
        if let Some(p) = prev {
            if !(no_space_before.contains(&text) || no_space_after.contains(&p)) {
                out.push(' ');
            }
        }
        out.push_str(text);
        prev = Some(text);
    }
    out
}

fn referenced_identifiers(tokens: &[Token]) -> BTreeSet<String> {
    tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.text.clone())
        .collect()
}

fn span(from: SourceLocation, to: SourceLocation) -> SourceLocation {
    SourceLocation::new(
        from.start_line,
        from.start_column,
        to.end_line,
        to.end_column,
    )
}

/// Parses the supported C++ subset of one source file into a [`CodeModel`].
pub fn parse(source: &str, file_id: &str) -> Result<CodeModel, ParseError> {
    let tokens = tokenize(source, file_id)?;
    let code: Vec<Token> = tokens.into_iter().filter(Token::is_code).collect();
    let mut parser = Parser { toks: code, pos: 0 };
    parser.parse_model(file_id)
}

#[derive(Default)]
struct ArtificialClass {
    attributes: Vec<AttributeDecl>,
    operations: Vec<OperationDecl>,
    first: Option<SourceLocation>,
    last: Option<SourceLocation>,
}

impl ArtificialClass {
    fn note(&mut self, loc: SourceLocation) {
        if self.first.is_none() {
            self.first = Some(loc);
        }
        self.last = Some(loc);
    }
}

struct Builder {
    classes: Vec<ClassDecl>,
    generalizations: Vec<Generalization>,
    artificial: BTreeMap<String, ArtificialClass>,
}

#[allow(clippy::large_enum_variant)]
enum Member {
    Operation(OperationDecl),
    Attributes(Vec<AttributeDecl>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    // ── token plumbing ──────────────────────────────────────────────

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_text(&self) -> &str {
        self.toks
            .get(self.pos)
            .map(|t| t.text.as_str())
            .unwrap_or("")
    }

    fn text_at(&self, offset: usize) -> &str {
        self.toks
            .get(self.pos + offset)
            .map(|t| t.text.as_str())
            .unwrap_or("")
    }

    fn at(&self, text: &str) -> bool {
        self.peek_text() == text
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn here(&self) -> SourceLocation {
        match self.peek() {
            Some(t) => t.location,
            None => self
                .toks
                .last()
                .map(|t| SourceLocation::point(t.location.end_line, t.location.end_column))
                .unwrap_or_else(|| SourceLocation::point(1, 1)),
        }
    }

    fn last_loc(&self) -> SourceLocation {
        self.toks
            .get(self.pos.saturating_sub(1))
            .map(|t| t.location)
            .unwrap_or_else(|| SourceLocation::point(1, 1))
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            message: message.into(),
            location: self.here(),
        }
    }

    fn unsupported(&self, construct: &str, location: SourceLocation) -> ParseError {
        ParseError::Unsupported {
            construct: construct.to_string(),
            location,
        }
    }

    fn expect(&mut self, text: &str) -> Result<Token, ParseError> {
        if self.at(text) {
            Ok(self.bump().unwrap())
        } else {
            Err(self.err(format!("expected '{}', found '{}'", text, self.peek_text())))
        }
    }

    fn expect_identifier(&mut self) -> Result<Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.bump().unwrap()),
            _ => Err(self.err(format!("expected identifier, found '{}'", self.peek_text()))),
        }
    }

    // When a nested template argument list closes against a `>>` token,
    // split it so the outer list still sees a `>`.
    fn eat_closing_angle(&mut self) -> bool {
        if self.at(">") {
            self.pos += 1;
            return true;
        }
        if self.at(">>") {
            self.toks[self.pos].text = ">".to_string();
            return true;
        }
        false
    }

    fn skip_to_semicolon(&mut self) -> Result<(), ParseError> {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match t.text.as_str() {
                "(" | "{" | "[" => depth += 1,
                ")" | "}" | "]" => depth = depth.saturating_sub(1),
                ";" if depth == 0 => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err(self.err("expected ';'"))
    }

    // ── model assembly ──────────────────────────────────────────────

    fn parse_model(&mut self, file_id: &str) -> Result<CodeModel, ParseError> {
        let mut builder = Builder {
            classes: Vec::new(),
            generalizations: Vec::new(),
            artificial: BTreeMap::new(),
        };
        self.parse_scope("", &mut builder, false)?;
        if self.peek().is_some() {
            return Err(self.err(format!("unexpected '{}'", self.peek_text())));
        }
        let mut classes = builder.classes;
        for (package, art) in builder.artificial {
            if art.attributes.is_empty() && art.operations.is_empty() {
                continue;
            }
            let location = span(
                art.first.unwrap_or_else(|| SourceLocation::point(1, 1)),
                art.last.unwrap_or_else(|| SourceLocation::point(1, 1)),
            );
            classes.push(ClassDecl {
                simple_name: GLOBALS_CLASS_NAME.to_string(),
                package,
                kind: ClassKind::Artificial,
                template_params: Vec::new(),
                attributes: art.attributes,
                operations: art.operations,
                location,
            });
        }
        let model = CodeModel {
            file_id: file_id.to_string(),
            classes,
            generalizations: builder.generalizations,
        };
        if let Err(e) = crate::model::validate_model(&model) {
            return Err(ParseError::Syntax {
                message: e.message,
                location: SourceLocation::point(1, 1),
            });
        }
        Ok(model)
    }

    fn parse_scope(
        &mut self,
        package: &str,
        builder: &mut Builder,
        inside_braces: bool,
    ) -> Result<(), ParseError> {
        loop {
            match self.peek_text() {
                "" => {
                    if inside_braces {
                        return Err(self.err("unexpected end of file, expected '}'"));
                    }
                    return Ok(());
                }
                "}" if inside_braces => return Ok(()),
                "namespace" => self.parse_namespace(package, builder)?,
                "using" | "typedef" => {
                    self.bump();
                    self.skip_to_semicolon()?;
                }
                "template" => {
                    let params = self.parse_template_header()?;
                    match self.peek_text() {
                        "class" | "struct" => self.parse_class(package, builder, params)?,
                        _ => self.parse_free_declaration(package, builder)?,
                    }
                }
                "class" | "struct" => self.parse_class(package, builder, Vec::new())?,
                "enum" => {
                    let loc = self.here();
                    return Err(self.unsupported("enum declaration", loc));
                }
                "union" => {
                    let loc = self.here();
                    return Err(self.unsupported("union declaration", loc));
                }
                ";" => {
                    self.bump();
                }
                "extern" => {
                    self.bump();
                }
                _ => self.parse_free_declaration(package, builder)?,
            }
        }
    }

    fn parse_namespace(&mut self, package: &str, builder: &mut Builder) -> Result<(), ParseError> {
        let kw = self.expect("namespace")?;
        if self.at("{") {
            return Err(self.unsupported("anonymous namespace", kw.location));
        }
        let mut path = self.expect_identifier()?.text;
        while self.at("::") {
            self.bump();
            path.push_str("::");
            path.push_str(&self.expect_identifier()?.text);
        }
        self.expect("{")?;
        let nested = if package.is_empty() {
            path
        } else {
            format!("{package}::{path}")
        };
        self.parse_scope(&nested, builder, true)?;
        self.expect("}")?;
        Ok(())
    }

    fn parse_template_header(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect("template")?;
        self.expect("<")?;
        let mut params = Vec::new();
        if self.eat_closing_angle() {
            return Ok(params);
        }
        loop {
            // `typename T`, `class T`, or a non-type parameter like `int N`:
            // the last identifier before `,`/`>` is the parameter name.
            let mut last_ident: Option<String> = None;
            loop {
                match self.peek() {
                    None => return Err(self.err("unterminated template parameter list")),
                    Some(t) if t.text == "," || t.text == ">" || t.text == ">>" => break,
                    Some(t) => {
                        if t.kind == TokenKind::Identifier {
                            last_ident = Some(t.text.clone());
                        }
                        self.bump();
                    }
                }
            }
            params.push(last_ident.ok_or_else(|| self.err("expected template parameter name"))?);
            if self.eat(",") {
                continue;
            }
            if self.eat_closing_angle() {
                break;
            }
            return Err(self.err("expected '>' after template parameters"));
        }
        Ok(params)
    }

    fn parse_class(
        &mut self,
        package: &str,
        builder: &mut Builder,
        template_params: Vec<String>,
    ) -> Result<(), ParseError> {
        let kw = self.bump().expect("caller checked class/struct keyword");
        let kind = if kw.text == "struct" {
            ClassKind::Struct
        } else {
            ClassKind::Class
        };
        let name = self.expect_identifier()?.text;
        if self.eat(";") {
            // Forward declaration: no model entry.
            return Ok(());
        }
        let qualified = if package.is_empty() {
            name.clone()
        } else {
            format!("{package}::{name}")
        };

        if self.eat(":") {
            loop {
                while matches!(
                    self.peek_text(),
                    "virtual" | "public" | "protected" | "private"
                ) {
                    self.bump();
                }
                let parent = self.parse_qualified_type_name()?;
                builder.generalizations.push(Generalization {
                    child: qualified.clone(),
                    parent,
                });
                if !self.eat(",") {
                    break;
                }
            }
        }

        self.expect("{")?;
        let default_vis = if kind == ClassKind::Struct {
            Visibility::Public
        } else {
            Visibility::Private
        };
        let mut vis = default_vis;
        let mut attributes = Vec::new();
        let mut operations = Vec::new();
        loop {
            match self.peek_text() {
                "" => return Err(self.err("unexpected end of file inside class body")),
                "}" => break,
                "public" | "protected" | "private" => {
                    let v = self.bump().unwrap().text;
                    self.expect(":")?;
                    vis = match v.as_str() {
                        "public" => Visibility::Public,
                        "protected" => Visibility::Protected,
                        _ => Visibility::Private,
                    };
                }
                "class" | "struct" => {
                    let loc = self.here();
                    return Err(self.unsupported("nested class", loc));
                }
                "enum" | "union" => {
                    let loc = self.here();
                    return Err(self.unsupported("enum declaration", loc));
                }
                "friend" | "using" | "typedef" => {
                    self.bump();
                    self.skip_to_semicolon()?;
                }
                "template" => {
                    // Member templates are accepted; the parameter list is
                    // not tracked on operations.
                    self.parse_template_header()?;
                }
                ";" => {
                    self.bump();
                }
                _ => match self.parse_declaration(Some(&name), vis)? {
                    Member::Operation(op) => operations.push(op),
                    Member::Attributes(attrs) => attributes.extend(attrs),
                },
            }
        }
        self.expect("}")?;
        let end = self.expect(";")?;
        builder.classes.push(ClassDecl {
            simple_name: name,
            package: package.to_string(),
            kind,
            template_params,
            attributes,
            operations,
            location: span(kw.location, end.location),
        });
        Ok(())
    }

    /// Qualified name with optional template arguments, rendered as text,
    /// e.g. `std::vector<int>` — used for base-class references.
    fn parse_qualified_type_name(&mut self) -> Result<String, ParseError> {
        let mut out = self.expect_identifier()?.text;
        while self.at("::") {
            self.bump();
            out.push_str("::");
            out.push_str(&self.expect_identifier()?.text);
        }
        if self.at("<") {
            let saved = self.pos;
            self.bump();
            match self.parse_type_list_until_angle() {
                Ok(args) => {
                    out.push('<');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        out.push_str(&a.render());
                    }
                    out.push('>');
                }
                Err(_) => self.pos = saved,
            }
        }
        Ok(out)
    }

    fn parse_free_declaration(
        &mut self,
        package: &str,
        builder: &mut Builder,
    ) -> Result<(), ParseError> {
        let member = self.parse_declaration(None, Visibility::Public)?;
        let art = builder.artificial.entry(package.to_string()).or_default();
        match member {
            Member::Operation(op) => {
                art.note(op.location);
                art.operations.push(op);
            }
            Member::Attributes(attrs) => {
                for a in attrs {
                    art.note(a.location);
                    art.attributes.push(a);
                }
            }
        }
        Ok(())
    }

    /// One member or namespace-level declaration: an operation or one or
    /// more attributes/variables sharing a base type.
    fn parse_declaration(
        &mut self,
        class_name: Option<&str>,
        visibility: Visibility,
    ) -> Result<Member, ParseError> {
        let start = self.here();
        let mut modifiers: BTreeSet<Modifier> = BTreeSet::new();
        loop {
            match self.peek_text() {
                "static" | "inline" | "virtual" | "explicit" | "mutable" | "constexpr" => {
                    let m = Modifier::from_str(self.bump().unwrap().text.as_str()).unwrap();
                    modifiers.insert(m);
                }
                // Leading `const` is tracked as a member modifier, matching
                // how modifier changes are reported.
                "const" => {
                    self.bump();
                    modifiers.insert(Modifier::Const);
                }
                _ => break,
            }
        }

        // Constructors and destructors: no return type.
        if let Some(cls) = class_name {
            if self.at("~") && self.text_at(1) == cls && self.text_at(2) == "(" {
                self.bump();
                self.bump();
                let name = format!("~{cls}");
                let op = self.parse_operation(name, None, false, modifiers, visibility, start)?;
                return Ok(Member::Operation(op));
            }
            if self.peek_text() == cls && self.text_at(1) == "(" {
                self.bump();
                let op = self.parse_operation(
                    cls.to_string(),
                    None,
                    true,
                    modifiers,
                    visibility,
                    start,
                )?;
                return Ok(Member::Operation(op));
            }
        }

        let ty = self.parse_type()?;
        let name = self.parse_declarator_name()?;
        if self.at("(") {
            let op = self.parse_operation(name, Some(ty), false, modifiers, visibility, start)?;
            return Ok(Member::Operation(op));
        }

        // Attribute / variable declarator list.
        let mut attrs = Vec::new();
        let mut current = name;
        loop {
            let initializer = self.parse_initializer()?;
            let end = self.last_loc();
            attrs.push(AttributeDecl {
                name: current,
                ty: ty.clone(),
                modifiers: modifiers.clone(),
                visibility,
                initializer_text: initializer,
                location: span(start, end),
            });
            if self.eat(",") {
                current = self.expect_identifier()?.text;
                continue;
            }
            let end = self.expect(";")?;
            let last = attrs.len() - 1;
            attrs[last].location = span(start, end.location);
            break;
        }
        Ok(Member::Attributes(attrs))
    }

    fn parse_declarator_name(&mut self) -> Result<String, ParseError> {
        if self.at("operator") {
            self.bump();
            let mut name = "operator".to_string();
            if self.at("(") && self.text_at(1) == ")" {
                self.bump();
                self.bump();
                name.push_str("()");
                return Ok(name);
            }
            if self.at("[") && self.text_at(1) == "]" {
                self.bump();
                self.bump();
                name.push_str("[]");
                return Ok(name);
            }
            while let Some(t) = self.peek() {
                if t.kind == TokenKind::Punctuator && t.text != "(" {
                    name.push_str(&t.text);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if name == "operator" {
                return Err(self.err("expected operator symbol after 'operator'"));
            }
            return Ok(name);
        }
        Ok(self.expect_identifier()?.text)
    }

    fn parse_initializer(&mut self) -> Result<Option<String>, ParseError> {
        if self.eat("=") {
            let toks = self.capture_until(&[";", ","], false)?;
            if toks.is_empty() {
                return Err(self.err("expected initializer expression"));
            }
            return Ok(Some(normalize_tokens(&toks)));
        }
        if self.at("{") {
            let toks = self.capture_balanced("{", "}")?;
            return Ok(Some(normalize_tokens(&toks)));
        }
        Ok(None)
    }

    fn parse_operation(
        &mut self,
        name: String,
        return_type: Option<TypeRef>,
        is_constructor: bool,
        mut modifiers: BTreeSet<Modifier>,
        visibility: Visibility,
        start: SourceLocation,
    ) -> Result<OperationDecl, ParseError> {
        self.expect("(")?;
        let mut parameters = Vec::new();
        if !self.at(")") {
            loop {
                let param = self.parse_parameter(parameters.len() as u32)?;
                parameters.push(param);
                if self.eat(",") {
                    continue;
                }
                break;
            }
        }
        self.expect(")")?;

        loop {
            match self.peek_text() {
                "const" => {
                    self.bump();
                    modifiers.insert(Modifier::Const);
                }
                "override" | "final" | "noexcept" => {
                    self.bump();
                }
                _ => break,
            }
        }

        let mut body = None;
        if self.eat(";") {
            // Declaration without a body.
        } else if self.eat("=") {
            // Pure virtual, defaulted, or deleted.
            self.bump();
            self.expect(";")?;
        } else {
            if self.eat(":") {
                // Constructor initializer list: skip to the body.
                let mut depth = 0usize;
                loop {
                    match self.peek_text() {
                        "" => return Err(self.err("unterminated constructor initializer list")),
                        "(" | "{" if depth > 0 => depth += 1,
                        "(" => depth += 1,
                        ")" => depth = depth.saturating_sub(1),
                        "{" if depth == 0 => break,
                        _ => {}
                    }
                    self.pos += 1;
                }
            }
            body = Some(self.parse_block()?);
        }
        let end = self.last_loc();
        Ok(OperationDecl {
            name,
            parameters,
            return_type,
            modifiers,
            visibility,
            body,
            is_constructor,
            location: span(start, end),
        })
    }

    fn parse_parameter(&mut self, position: u32) -> Result<Parameter, ParseError> {
        let start = self.here();
        let is_const = self.eat("const");
        let mut ty = self.parse_type()?;
        ty.is_const = ty.is_const || is_const;
        let name = match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => self.bump().unwrap().text,
            _ => String::new(),
        };
        if self.eat("=") {
            // Default argument: captured positionally only.
            self.capture_until_keep(&[",", ")"])?;
        }
        let end = self.last_loc();
        Ok(Parameter {
            name,
            ty,
            position,
            location: span(start, end),
        })
    }

    // ── types ───────────────────────────────────────────────────────

    fn parse_type(&mut self) -> Result<TypeRef, ParseError> {
        let mut is_const = false;
        while self.eat("const") {
            is_const = true;
        }
        let base_name = if BUILTIN_TYPE_WORDS.contains(&self.peek_text()) {
            let mut words = Vec::new();
            while BUILTIN_TYPE_WORDS.contains(&self.peek_text()) {
                words.push(self.bump().unwrap().text);
            }
            words.join(" ")
        } else {
            self.eat("typename");
            let mut name = self.expect_identifier()?.text;
            while self.at("::") && !self.text_at(1).is_empty() {
                self.bump();
                name.push_str("::");
                name.push_str(&self.expect_identifier()?.text);
            }
            name
        };

        let mut template_args = Vec::new();
        if self.at("<") {
            let saved = self.pos;
            self.bump();
            match self.parse_type_list_until_angle() {
                Ok(args) => template_args = args,
                Err(_) => self.pos = saved,
            }
        }

        while self.eat("const") {
            is_const = true;
        }
        let mut pointer_depth = 0;
        while self.eat("*") {
            pointer_depth += 1;
            while self.eat("const") {
                is_const = true;
            }
        }
        let is_reference = self.eat("&") || self.eat("&&");
        Ok(TypeRef {
            base_name,
            template_args,
            is_const,
            pointer_depth,
            is_reference,
        })
    }

    fn parse_type_list_until_angle(&mut self) -> Result<Vec<TypeRef>, ParseError> {
        let mut args = Vec::new();
        if self.eat_closing_angle() {
            return Ok(args);
        }
        loop {
            args.push(self.parse_type()?);
            if self.eat(",") {
                continue;
            }
            if self.eat_closing_angle() {
                return Ok(args);
            }
            return Err(self.err("expected '>' in template argument list"));
        }
    }

    // ── statements ──────────────────────────────────────────────────

    fn parse_block(&mut self) -> Result<Statement, ParseError> {
        let open = self.expect("{")?;
        let mut children = Vec::new();
        loop {
            match self.peek_text() {
                "" => return Err(self.err("unexpected end of file, expected '}'")),
                "}" => break,
                _ => children.push(self.parse_statement()?),
            }
        }
        let close = self.expect("}")?;
        Ok(Statement {
            kind: StatementKind::Block,
            normalized_text: String::new(),
            children,
            declared_variables: Vec::new(),
            referenced_identifiers: BTreeSet::new(),
            location: span(open.location, close.location),
        })
    }

    fn parse_statement(&mut self) -> Result<Statement, ParseError> {
        match self.peek_text() {
            "{" => self.parse_block(),
            "if" => self.parse_if(),
            "while" => self.parse_paren_headed(StatementKind::While),
            "switch" => self.parse_paren_headed(StatementKind::Switch),
            "for" => self.parse_paren_headed(StatementKind::For),
            "do" => self.parse_do(),
            "try" => self.parse_try(),
            "return" => {
                let kw = self.bump().unwrap();
                let mut toks = alloc::vec![kw.clone()];
                toks.extend(self.capture_until(&[";"], true)?);
                let end = self.last_loc();
                Ok(self.leaf(StatementKind::Return, toks, span(kw.location, end)))
            }
            "break" | "continue" => {
                let kw = self.bump().unwrap();
                let kind = if kw.text == "break" {
                    StatementKind::Break
                } else {
                    StatementKind::Continue
                };
                let end = self.expect(";")?;
                Ok(self.leaf(
                    kind,
                    alloc::vec![kw.clone()],
                    span(kw.location, end.location),
                ))
            }
            "case" | "default" => {
                // Switch labels are kept as expression leaves.
                let start = self.here();
                let mut toks = Vec::new();
                while !self.at(":") && self.peek().is_some() {
                    toks.push(self.bump().unwrap());
                }
                self.expect(":")?;
                let end = self.last_loc();
                Ok(self.leaf(StatementKind::Expression, toks, span(start, end)))
            }
            "class" | "struct" => {
                let loc = self.here();
                Err(self.unsupported("local class", loc))
            }
            "" => Err(self.err("expected statement")),
            _ => self.parse_declaration_or_expression(),
        }
    }

    fn parse_if(&mut self) -> Result<Statement, ParseError> {
        let kw = self.expect("if")?;
        let mut header = alloc::vec![kw.clone()];
        header.extend(self.capture_paren_group()?);
        let then_branch = self.parse_statement()?;
        let mut children = alloc::vec![then_branch];
        if self.eat("else") {
            children.push(self.parse_statement()?);
        }
        let end = children.last().map(|s| s.location).unwrap_or(kw.location);
        Ok(self.composite(StatementKind::If, header, children, span(kw.location, end)))
    }

    fn parse_paren_headed(&mut self, kind: StatementKind) -> Result<Statement, ParseError> {
        let kw = self.bump().unwrap();
        let mut header = alloc::vec![kw.clone()];
        header.extend(self.capture_paren_group()?);
        let body = self.parse_statement()?;
        let end = body.location;
        Ok(self.composite(kind, header, alloc::vec![body], span(kw.location, end)))
    }

    fn parse_do(&mut self) -> Result<Statement, ParseError> {
        let kw = self.expect("do")?;
        let body = self.parse_statement()?;
        let wh = self.expect("while")?;
        let mut header = alloc::vec![kw.clone(), wh];
        header.extend(self.capture_paren_group()?);
        let end = self.expect(";")?;
        Ok(self.composite(
            StatementKind::Do,
            header,
            alloc::vec![body],
            span(kw.location, end.location),
        ))
    }

    fn parse_try(&mut self) -> Result<Statement, ParseError> {
        let kw = self.expect("try")?;
        let block = self.parse_block()?;
        let mut children = alloc::vec![block];
        while self.at("catch") {
            let ckw = self.bump().unwrap();
            let mut header = alloc::vec![ckw.clone()];
            header.extend(self.capture_paren_group()?);
            let cblock = self.parse_block()?;
            let loc = span(ckw.location, cblock.location);
            children.push(self.composite(StatementKind::Block, header, cblock.children, loc));
        }
        let end = children.last().map(|s| s.location).unwrap_or(kw.location);
        Ok(self.composite(
            StatementKind::Try,
            alloc::vec![kw.clone()],
            children,
            span(kw.location, end),
        ))
    }

    fn parse_declaration_or_expression(&mut self) -> Result<Statement, ParseError> {
        let start = self.here();
        if let Some(stmt) = self.try_parse_local_declaration()? {
            return Ok(stmt);
        }
        let toks = self.capture_until(&[";"], true)?;
        let end = self.last_loc();
        Ok(self.leaf(StatementKind::Expression, toks, span(start, end)))
    }

    /// Backtracking attempt at a local variable declaration. A statement is
    /// taken as a declaration when it starts with `const` or a builtin type
    /// word, or when a type followed by an identifier and one of `=`/`;`/`,`
    /// parses cleanly. `a * b;` stays an expression unless `a` is spelled
    /// like a type.
    fn try_parse_local_declaration(&mut self) -> Result<Option<Statement>, ParseError> {
        let saved = self.pos;
        let start = self.here();
        let obviously_typed = self.at("const") || BUILTIN_TYPE_WORDS.contains(&self.peek_text());
        let ty = match self.parse_type() {
            Ok(t) => t,
            Err(_) => {
                self.pos = saved;
                return Ok(None);
            }
        };
        let name_ok = self
            .peek()
            .map(|t| t.kind == TokenKind::Identifier)
            .unwrap_or(false);
        let next = self.text_at(1);
        let shape_ok = name_ok && matches!(next, "=" | ";" | ",");
        if !shape_ok || (!obviously_typed && ty.pointer_depth > 0) {
            self.pos = saved;
            if !obviously_typed {
                return Ok(None);
            }
            return Err(self.err("malformed declaration"));
        }

        let mut declared = Vec::new();
        loop {
            let name = self.expect_identifier()?.text;
            declared.push(DeclaredVariable {
                name,
                ty: ty.clone(),
            });
            if self.eat("=") {
                self.capture_until_keep(&[";", ","])?;
            }
            if self.eat(",") {
                continue;
            }
            break;
        }
        self.expect(";")?;
        let end = self.last_loc();
        let all_toks: Vec<Token> = self.toks[saved..self.pos].to_vec();
        let mut stmt = self.leaf(StatementKind::Declaration, all_toks, span(start, end));
        stmt.declared_variables = declared;
        Ok(Some(stmt))
    }

    fn leaf(&self, kind: StatementKind, tokens: Vec<Token>, location: SourceLocation) -> Statement {
        Statement {
            kind,
            normalized_text: normalize_tokens(&tokens),
            children: Vec::new(),
            declared_variables: Vec::new(),
            referenced_identifiers: referenced_identifiers(&tokens),
            location,
        }
    }

    fn composite(
        &self,
        kind: StatementKind,
        header: Vec<Token>,
        children: Vec<Statement>,
        location: SourceLocation,
    ) -> Statement {
        Statement {
            kind,
            normalized_text: normalize_tokens(&header),
            children,
            declared_variables: Vec::new(),
            referenced_identifiers: referenced_identifiers(&header),
            location,
        }
    }

    // ── token capture helpers ───────────────────────────────────────

    /// Collects tokens up to (but not including) one of `stops` at nesting
    /// depth zero. Rejects lambda introducers. With `consume_stop` the
    /// terminator is consumed but not collected.
    fn capture_until(
        &mut self,
        stops: &[&str],
        consume_stop: bool,
    ) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        let mut depth = 0usize;
        loop {
            let Some(tok) = self.peek().cloned() else {
                return Err(self.err(format!("expected one of {stops:?}")));
            };
            if depth == 0 && stops.contains(&tok.text.as_str()) {
                if consume_stop {
                    self.pos += 1;
                }
                return Ok(out);
            }
            match tok.text.as_str() {
                "(" | "{" => depth += 1,
                ")" | "}" => {
                    if depth == 0 {
                        return Err(self.err(format!("expected one of {stops:?}")));
                    }
                    depth -= 1;
                }
                "[" => {
                    self.check_lambda(out.last(), tok.location)?;
                    depth += 1;
                }
                "]" => depth = depth.saturating_sub(1),
                _ => {}
            }
            out.push(tok);
            self.pos += 1;
        }
    }

    fn capture_until_keep(&mut self, stops: &[&str]) -> Result<Vec<Token>, ParseError> {
        self.capture_until(stops, false)
    }

    /// A balanced `( ... )` group including the parentheses.
    fn capture_paren_group(&mut self) -> Result<Vec<Token>, ParseError> {
        let open = self.expect("(")?;
        let mut out = alloc::vec![open];
        let mut depth = 1usize;
        loop {
            let Some(tok) = self.peek().cloned() else {
                return Err(self.err("unbalanced '('"));
            };
            match tok.text.as_str() {
                "(" => depth += 1,
                ")" => depth -= 1,
                "[" => self.check_lambda(out.last(), tok.location)?,
                _ => {}
            }
            out.push(tok);
            self.pos += 1;
            if depth == 0 {
                return Ok(out);
            }
        }
    }

    /// Balanced group from `open` to `close`, returning the inner tokens.
    fn capture_balanced(&mut self, open: &str, close: &str) -> Result<Vec<Token>, ParseError> {
        self.expect(open)?;
        let mut out = Vec::new();
        let mut depth = 1usize;
        loop {
            let Some(tok) = self.peek().cloned() else {
                return Err(self.err(format!("unbalanced '{open}'")));
            };
            if tok.text == open {
                depth += 1;
            } else if tok.text == close {
                depth -= 1;
                if depth == 0 {
                    self.pos += 1;
                    return Ok(out);
                }
            }
            out.push(tok);
            self.pos += 1;
        }
    }

    /// A `[` in expression position (not a subscript) is a lambda
    /// introducer, which is outside the subset.
    fn check_lambda(
        &self,
        prev: Option<&Token>,
        location: SourceLocation,
    ) -> Result<(), ParseError> {
        let subscript = prev.is_some_and(|p| {
            matches!(p.kind, TokenKind::Identifier | TokenKind::Literal)
                || p.text == ")"
                || p.text == "]"
        });
        if subscript {
            Ok(())
        } else {
            Err(ParseError::Unsupported {
                construct: "lambda".to_string(),
                location,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lookup_class;

    pub(crate) const CIRCLE_V1: &str = "class Circle{\n  double PI = 3.14159;\npublic:\n  double getArea(double r){\n    return PI * r * r;\n  }\n  double calcCircumference(double radius){\n    double diameter = radius * radius; //bug\n    return PI * diameter;\n  }\n};\n";

    pub(crate) const CIRCLE_V2: &str = "class CircleCalculator{\n  inline static const double PI = 3.14159;\npublic:\n  static double calcArea(double radius){\n    return PI * radius * radius;\n  }\n  static double calcSectorArea(double radius,\n                               double angle){\n    return angle / 360 * calcArea(radius);\n  }\n  static double calcCircumference(double radius){\n    double diameter = radius + radius;\n    return PI * diameter;\n  }\n};\n";

    #[test]
    fn parses_circle_v1() {
        let model = parse(CIRCLE_V1, "v1.cpp").unwrap();
        let circle = lookup_class(&model, "Circle").unwrap();
        assert_eq!(circle.kind, ClassKind::Class);
        assert_eq!(circle.attributes.len(), 1);
        assert_eq!(circle.operations.len(), 2);

        let pi = &circle.attributes[0];
        assert_eq!(pi.name, "PI");
        assert_eq!(pi.visibility, Visibility::Private);
        assert_eq!(pi.initializer_text.as_deref(), Some("3.14159"));
        assert!(pi.modifiers.is_empty());
        assert_eq!(pi.location.start_line, 2);

        let get_area = circle.find_operation("getArea").unwrap();
        assert_eq!(get_area.visibility, Visibility::Public);
        assert_eq!(get_area.parameters.len(), 1);
        assert_eq!(get_area.parameters[0].name, "r");
        assert_eq!(get_area.parameters[0].ty, TypeRef::named("double"));
        let body = get_area.body.as_ref().unwrap();
        assert_eq!(body.leaves().len(), 1);
        assert_eq!(body.leaves()[0].normalized_text, "return PI * r * r");

        let calc = circle.find_operation("calcCircumference").unwrap();
        let leaves = calc
            .body
            .as_ref()
            .unwrap()
            .leaves()
            .iter()
            .map(|s| s.normalized_text.clone())
            .collect::<Vec<_>>();
        assert_eq!(
            leaves,
            ["double diameter = radius * radius", "return PI * diameter"]
        );
    }

    #[test]
    fn parses_circle_v2() {
        let model = parse(CIRCLE_V2, "v2.cpp").unwrap();
        let cls = lookup_class(&model, "CircleCalculator").unwrap();
        let pi = cls.find_attribute("PI").unwrap();
        let mods: Vec<_> = pi.modifiers.iter().map(|m| m.as_str()).collect();
        assert_eq!(mods, ["static", "const", "inline"]);
        assert_eq!(pi.ty, TypeRef::named("double"));

        for name in ["calcArea", "calcSectorArea", "calcCircumference"] {
            let op = cls.find_operation(name).unwrap();
            assert!(
                op.modifiers.contains(&Modifier::Static),
                "{name} should be static"
            );
        }
        let sector = cls.find_operation("calcSectorArea").unwrap();
        assert_eq!(sector.parameters.len(), 2);
        assert_eq!(sector.location.start_line, 7);
        assert_eq!(sector.location.end_line, 10);
    }

    #[test]
    fn struct_with_multiple_inheritance() {
        let model = parse("struct P : A, B {};", "t.cpp").unwrap();
        let p = lookup_class(&model, "P").unwrap();
        assert_eq!(p.kind, ClassKind::Struct);
        let pairs: Vec<_> = model
            .generalizations
            .iter()
            .map(|g| (g.child.as_str(), g.parent.as_str()))
            .collect();
        assert_eq!(pairs, [("P", "A"), ("P", "B")]);
    }

    #[test]
    fn struct_members_default_public() {
        let model = parse("struct S { int x; };", "t.cpp").unwrap();
        let s = lookup_class(&model, "S").unwrap();
        assert_eq!(s.attributes[0].visibility, Visibility::Public);
    }

    #[test]
    fn lambda_is_rejected_with_location() {
        let src = "class C {\npublic:\n  int f() {\n    auto g = [](int x){ return x; };\n    return 1;\n  }\n};";
        let err = parse(src, "t.cpp").unwrap_err();
        match err {
            ParseError::Unsupported {
                construct,
                location,
            } => {
                assert_eq!(construct, "lambda");
                assert_eq!(location.start_line, 4);
            }
            other => panic!("expected unsupported-construct error, got {other:?}"),
        }
    }

    #[test]
    fn nested_class_is_rejected() {
        let err = parse("class A { class B {}; };", "t.cpp").unwrap_err();
        assert!(
            matches!(err, ParseError::Unsupported { ref construct, .. } if construct == "nested class")
        );
    }

    #[test]
    fn local_class_is_rejected() {
        let err = parse("int f() { class X {}; return 0; }", "t.cpp").unwrap_err();
        assert!(
            matches!(err, ParseError::Unsupported { ref construct, .. } if construct == "local class")
        );
    }

    #[test]
    fn free_functions_go_to_artificial_class() {
        let src = "namespace math {\nint add(int a, int b) { return a + b; }\ndouble E = 2.71;\n}";
        let model = parse(src, "t.cpp").unwrap();
        let globals = lookup_class(&model, "math::<globals>").unwrap();
        assert_eq!(globals.kind, ClassKind::Artificial);
        assert!(globals.find_operation("add").is_some());
        assert_eq!(
            globals
                .find_attribute("E")
                .unwrap()
                .initializer_text
                .as_deref(),
            Some("2.71")
        );
    }

    #[test]
    fn global_namespace_artificial_class_has_empty_package() {
        let model = parse("int x = 1;", "t.cpp").unwrap();
        let globals = lookup_class(&model, "<globals>").unwrap();
        assert_eq!(globals.package, "");
    }

    #[test]
    fn empty_file_parses_to_empty_model() {
        let model = parse("", "t.cpp").unwrap();
        assert!(model.classes.is_empty());
    }

    #[test]
    fn nested_namespaces_build_package_paths() {
        let src = "namespace a { namespace b { class C {}; } }";
        let model = parse(src, "t.cpp").unwrap();
        assert!(lookup_class(&model, "a::b::C").is_some());
    }

    #[test]
    fn templates_become_template_params() {
        let src = "template <typename T, class U> class Pair { T first; U second; };";
        let model = parse(src, "t.cpp").unwrap();
        let pair = lookup_class(&model, "Pair").unwrap();
        assert_eq!(pair.template_params, ["T", "U"]);
        assert_eq!(pair.attributes[0].ty, TypeRef::named("T"));
    }

    #[test]
    fn templated_member_types_parse() {
        let src = "class C { std::vector<int> items; };";
        let model = parse(src, "t.cpp").unwrap();
        let c = lookup_class(&model, "C").unwrap();
        assert_eq!(c.attributes[0].ty.render(), "std::vector<int>");
    }

    #[test]
    fn constructor_and_destructor_have_no_return_type() {
        let src =
            "class C {\npublic:\n  C(int v) { x = v; }\n  ~C() { x = 0; }\nprivate:\n  int x;\n};";
        let model = parse(src, "t.cpp").unwrap();
        let c = lookup_class(&model, "C").unwrap();
        let ctor = c.find_operation("C").unwrap();
        assert!(ctor.is_constructor);
        assert!(ctor.return_type.is_none());
        let dtor = c.find_operation("~C").unwrap();
        assert!(!dtor.is_constructor);
        assert!(dtor.return_type.is_none());
    }

    #[test]
    fn operator_overloads_are_named_by_spelling() {
        let src = "class V { public: V operator+(const V& o) { return o; } };";
        let model = parse(src, "t.cpp").unwrap();
        let v = lookup_class(&model, "V").unwrap();
        assert!(v.find_operation("operator+").is_some());
    }

    #[test]
    fn bodiless_declarations_have_absent_body() {
        let src = "class C { public: int f(); };";
        let model = parse(src, "t.cpp").unwrap();
        let c = lookup_class(&model, "C").unwrap();
        assert!(c.find_operation("f").unwrap().body.is_none());
    }

    #[test]
    fn using_lines_and_preprocessor_are_stripped() {
        let src = "#include <vector>\nusing namespace std;\nclass C { int x; };";
        let model = parse(src, "t.cpp").unwrap();
        let c = lookup_class(&model, "C").unwrap();
        assert_eq!(c.location.start_line, 3);
    }

    #[test]
    fn composite_statements_keep_headers_and_children() {
        let src =
            "int f(int n) {\n  if (n > 0) {\n    return n;\n  } else {\n    return 0 - n;\n  }\n}";
        let model = parse(src, "t.cpp").unwrap();
        let f = lookup_class(&model, "<globals>")
            .unwrap()
            .find_operation("f")
            .unwrap();
        let body = f.body.as_ref().unwrap();
        let if_stmt = &body.children[0];
        assert_eq!(if_stmt.kind, StatementKind::If);
        assert_eq!(if_stmt.normalized_text, "if(n > 0)");
        assert_eq!(if_stmt.children.len(), 2);
        assert_eq!(body.leaves().len(), 2);
    }

    #[test]
    fn for_loop_headers_are_captured() {
        let src = "int sum(int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++) {\n    s = s + i;\n  }\n  return s;\n}";
        let model = parse(src, "t.cpp").unwrap();
        let f = lookup_class(&model, "<globals>")
            .unwrap()
            .find_operation("sum")
            .unwrap();
        let body = f.body.as_ref().unwrap();
        let for_stmt = &body.children[1];
        assert_eq!(for_stmt.kind, StatementKind::For);
        assert_eq!(for_stmt.normalized_text, "for(int i = 0; i < n; i++)");
    }

    #[test]
    fn statement_locations_nest_within_operations() {
        let model = parse(CIRCLE_V1, "t.cpp").unwrap();
        let circle = lookup_class(&model, "Circle").unwrap();
        for op in &circle.operations {
            let body = op.body.as_ref().unwrap();
            assert!(op.location.contains(&body.location));
            for leaf in body.leaves() {
                assert!(body.location.contains(&leaf.location), "{:?}", leaf);
            }
        }
    }

    #[test]
    fn parse_is_deterministic() {
        let a = parse(CIRCLE_V2, "t.cpp").unwrap();
        let b = parse(CIRCLE_V2, "t.cpp").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn declared_variables_are_recorded() {
        let src = "int f() { int a = 1, b = 2; return a + b; }";
        let model = parse(src, "t.cpp").unwrap();
        let f = lookup_class(&model, "<globals>")
            .unwrap()
            .find_operation("f")
            .unwrap();
        let decl = &f.body.as_ref().unwrap().children[0];
        let names: Vec<_> = decl
            .declared_variables
            .iter()
            .map(|d| d.name.as_str())
            .collect();
        assert_eq!(names, ["a", "b"]);
    }

    #[test]
    fn normalization_is_stable_across_formatting() {
        let a = parse("int f(){ return g( 1,2 ); }", "t.cpp").unwrap();
        let b = parse("int f() {\n  return g(1, 2);\n}", "t.cpp").unwrap();
        let leaf = |m: &CodeModel| {
            lookup_class(m, "<globals>").unwrap().operations[0]
                .body
                .as_ref()
                .unwrap()
                .leaves()[0]
                .normalized_text
                .clone()
        };
        assert_eq!(leaf(&a), leaf(&b));
        assert_eq!(leaf(&a), "return g(1,2)");
    }
}
