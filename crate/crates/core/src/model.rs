//! Language-neutral in-memory representation of one program version and
//! its JSON interchange format.
//!
//! A [`CodeModel`] holds every class of a single source file, including the
//! artificial `<globals>` classes that wrap namespace-level functions and
//! variables, plus the child→parent generalization list used to encode
//! (multiple) inheritance. Models are immutable after construction and can
//! be shared freely across concurrent comparisons.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Reserved simple name of the per-namespace artificial class that wraps
/// free functions and namespace-level variables. `<` is not a legal
/// identifier character, so the name cannot collide with user code.
pub const GLOBALS_CLASS_NAME: &str = "<globals>";

/// A line/column span inside one source file. Lines and columns are 1-based
/// and the span is inclusive on both ends.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "camelCase")]
pub struct SourceLocation {
    pub start_line: u32,
    pub start_column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

impl SourceLocation {
    pub fn new(start_line: u32, start_column: u32, end_line: u32, end_column: u32) -> Self {
        Self {
            start_line,
            start_column,
            end_line,
            end_column,
        }
    }

    /// Single-point location, useful for diagnostics.
    pub fn point(line: u32, column: u32) -> Self {
        Self::new(line, column, line, column)
    }

    pub fn contains(&self, other: &SourceLocation) -> bool {
        let starts_ok = self.start_line < other.start_line
            || (self.start_line == other.start_line && self.start_column <= other.start_column);
        let ends_ok = self.end_line > other.end_line
            || (self.end_line == other.end_line && self.end_column >= other.end_column);
        starts_ok && ends_ok
    }

    pub fn is_ordered(&self) -> bool {
        self.start_line < self.end_line
            || (self.start_line == self.end_line && self.start_column <= self.end_column)
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start_line, self.start_column)
    }
}

/// A (possibly templated) type reference. Templates are kept structurally,
/// mirroring how generics are represented on the consuming side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeRef {
    pub base_name: String,
    pub template_args: Vec<TypeRef>,
    pub is_const: bool,
    pub pointer_depth: u32,
    pub is_reference: bool,
}

impl TypeRef {
    pub fn named(base: &str) -> Self {
        Self {
            base_name: base.to_string(),
            template_args: Vec::new(),
            is_const: false,
            pointer_depth: 0,
            is_reference: false,
        }
    }

    /// Renders the type the way it would be spelled in source, e.g.
    /// `const std::vector<int>&` or `char**`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.is_const {
            out.push_str("const ");
        }
        out.push_str(&self.base_name);
        if !self.template_args.is_empty() {
            out.push('<');
            for (i, arg) in self.template_args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&arg.render());
            }
            out.push('>');
        }
        for _ in 0..self.pointer_depth {
            out.push('*');
        }
        if self.is_reference {
            out.push('&');
        }
        out
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Member modifiers tracked by the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modifier {
    Static,
    Const,
    Inline,
    Virtual,
    Explicit,
    Mutable,
    Constexpr,
}

impl Modifier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Modifier::Static => "static",
            Modifier::Const => "const",
            Modifier::Inline => "inline",
            Modifier::Virtual => "virtual",
            Modifier::Explicit => "explicit",
            Modifier::Mutable => "mutable",
            Modifier::Constexpr => "constexpr",
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "static" => Modifier::Static,
            "const" => Modifier::Const,
            "inline" => Modifier::Inline,
            "virtual" => Modifier::Virtual,
            "explicit" => Modifier::Explicit,
            "mutable" => Modifier::Mutable,
            "constexpr" => Modifier::Constexpr,
            _ => return None,
        })
    }
}

/// Member visibility. Defaults differ by class kind: `private` for classes,
/// `public` for structs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Protected,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Parameter {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    pub position: u32,
    pub location: SourceLocation,
}

/// Statement kinds. Leaf kinds carry normalized text; composite kinds carry
/// a header text (condition/loop-clause tokens) and children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementKind {
    Block,
    If,
    For,
    While,
    Do,
    Switch,
    Try,
    Expression,
    Declaration,
    Return,
    Break,
    Continue,
}

impl StatementKind {
    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            StatementKind::Expression
                | StatementKind::Declaration
                | StatementKind::Return
                | StatementKind::Break
                | StatementKind::Continue
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeclaredVariable {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
}

/// Recursive body representation. For leaf kinds `normalized_text` is the
/// canonical token string of the whole statement; for composite kinds it is
/// the header (e.g. `if(x > 0)`) and the body lives in `children`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Statement {
    pub kind: StatementKind,
    pub normalized_text: String,
    pub children: Vec<Statement>,
    pub declared_variables: Vec<DeclaredVariable>,
    pub referenced_identifiers: BTreeSet<String>,
    pub location: SourceLocation,
}

impl Statement {
    /// All leaf statements in document order, including this one if it is
    /// itself a leaf.
    pub fn leaves(&self) -> Vec<&Statement> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Statement>) {
        if self.kind.is_leaf() {
            out.push(self);
        } else {
            for child in &self.children {
                child.collect_leaves(out);
            }
        }
    }

    /// Declared variables of this statement and all descendants, in
    /// document order.
    pub fn all_declared_variables(&self) -> Vec<(&DeclaredVariable, &Statement)> {
        let mut out = Vec::new();
        self.collect_decls(&mut out);
        out
    }

    fn collect_decls<'a>(&'a self, out: &mut Vec<(&'a DeclaredVariable, &'a Statement)>) {
        for dv in &self.declared_variables {
            out.push((dv, self));
        }
        for child in &self.children {
            child.collect_decls(out);
        }
    }

    /// Union of referenced identifiers over the whole subtree.
    pub fn all_referenced_identifiers(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self
            .referenced_identifiers
            .iter()
            .map(|s| s.as_str())
            .collect();
        for child in &self.children {
            out.extend(child.all_referenced_identifiers());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OperationDecl {
    pub name: String,
    pub parameters: Vec<Parameter>,
    /// Absent for constructors and destructors.
    pub return_type: Option<TypeRef>,
    pub modifiers: BTreeSet<Modifier>,
    pub visibility: Visibility,
    /// Absent for declarations without bodies.
    pub body: Option<Statement>,
    pub is_constructor: bool,
    pub location: SourceLocation,
}

impl OperationDecl {
    /// Signature key used for exact member pairing: name plus rendered
    /// parameter types.
    pub fn signature_key(&self) -> String {
        let mut out = self.name.clone();
        out.push('(');
        for (i, p) in self.parameters.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&p.ty.render());
        }
        out.push(')');
        out
    }

    pub fn parameter_types(&self) -> Vec<&TypeRef> {
        self.parameters.iter().map(|p| &p.ty).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    pub modifiers: BTreeSet<Modifier>,
    pub visibility: Visibility,
    pub initializer_text: Option<String>,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Class,
    Struct,
    Artificial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassDecl {
    pub simple_name: String,
    /// Namespace path, e.g. `math::geo`; empty for the global namespace.
    pub package: String,
    pub kind: ClassKind,
    pub template_params: Vec<String>,
    pub attributes: Vec<AttributeDecl>,
    pub operations: Vec<OperationDecl>,
    pub location: SourceLocation,
}

impl ClassDecl {
    pub fn qualified_name(&self) -> String {
        if self.package.is_empty() {
            self.simple_name.clone()
        } else {
            format!("{}::{}", self.package, self.simple_name)
        }
    }

    pub fn find_operation(&self, name: &str) -> Option<&OperationDecl> {
        self.operations.iter().find(|o| o.name == name)
    }

    pub fn find_attribute(&self, name: &str) -> Option<&AttributeDecl> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// A child→parent inheritance edge. Parents may be external to the file and
/// are recorded verbatim in that case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generalization {
    pub child: String,
    pub parent: String,
}

/// One parsed source version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CodeModel {
    pub file_id: String,
    pub classes: Vec<ClassDecl>,
    pub generalizations: Vec<Generalization>,
}

impl CodeModel {
    pub fn empty(file_id: &str) -> Self {
        Self {
            file_id: file_id.to_string(),
            classes: Vec::new(),
            generalizations: Vec::new(),
        }
    }

    /// True when `ancestor` is reachable from `child` via generalization
    /// edges (transitively).
    pub fn is_ancestor(&self, child: &str, ancestor: &str) -> bool {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut stack: Vec<&str> = alloc::vec![child];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur) {
                continue;
            }
            for g in self.generalizations.iter().filter(|g| g.child == cur) {
                if g.parent == ancestor {
                    return true;
                }
                stack.push(&g.parent);
            }
        }
        false
    }
}

/// Returns the unique class with the given qualified name, if any.
pub fn lookup_class<'a>(model: &'a CodeModel, qualified_name: &str) -> Option<&'a ClassDecl> {
    model
        .classes
        .iter()
        .find(|c| c.qualified_name() == qualified_name)
}

/// Error raised for malformed or invariant-violating interchange documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelError {
    /// Path to the offending element, e.g. `$.classes[2]`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid model document at {}: {}",
            self.path, self.message
        )
    }
}

/// Serializes a model as the UTF-8 JSON interchange document. Output is
/// deterministic: the same model always yields byte-identical output.
pub fn serialize_model(model: &CodeModel) -> Vec<u8> {
    // Field order is fixed by the struct declarations.
    serde_json::to_vec_pretty(model).expect("model serialization cannot fail")
}

/// Parses and validates an interchange document.
pub fn deserialize_model(data: &[u8]) -> Result<CodeModel, ModelError> {
    let model: CodeModel = serde_json::from_slice(data).map_err(|e| ModelError {
        path: "$".to_string(),
        message: e.to_string(),
    })?;
    validate_model(&model)?;
    Ok(model)
}

/// Checks the structural invariants of a model: unique qualified names,
/// ordered locations, and resolvable generalization children.
pub fn validate_model(model: &CodeModel) -> Result<(), ModelError> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, class) in model.classes.iter().enumerate() {
        let qname = class.qualified_name();
        if let Some(prev) = seen.insert(qname.clone(), i) {
            return Err(ModelError {
                path: format!("$.classes[{i}]"),
                message: format!("duplicate qualified name '{qname}' (also at index {prev})"),
            });
        }
        if !class.location.is_ordered() {
            return Err(ModelError {
                path: format!("$.classes[{i}].location"),
                message: "location start is after its end".to_string(),
            });
        }
        let mut attr_names: BTreeSet<&str> = BTreeSet::new();
        for (j, attr) in class.attributes.iter().enumerate() {
            if !attr_names.insert(attr.name.as_str()) {
                return Err(ModelError {
                    path: format!("$.classes[{i}].attributes[{j}]"),
                    message: format!("duplicate attribute name '{}'", attr.name),
                });
            }
        }
    }
    for (i, g) in model.generalizations.iter().enumerate() {
        if !seen.contains_key(&g.child) {
            return Err(ModelError {
                path: format!("$.generalizations[{i}]"),
                message: format!(
                    "generalization child '{}' names no class in the model",
                    g.child
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample_class(simple: &str, package: &str) -> ClassDecl {
        ClassDecl {
            simple_name: simple.to_string(),
            package: package.to_string(),
            kind: ClassKind::Class,
            template_params: vec![],
            attributes: vec![],
            operations: vec![],
            location: SourceLocation::new(1, 1, 3, 2),
        }
    }

    fn sample_model() -> CodeModel {
        CodeModel {
            file_id: "a.cpp".to_string(),
            classes: vec![sample_class("Circle", ""), sample_class("Helper", "math")],
            generalizations: vec![Generalization {
                child: "math::Helper".to_string(),
                parent: "Circle".to_string(),
            }],
        }
    }

    #[test]
    fn lookup_finds_by_qualified_name() {
        let m = sample_model();
        assert_eq!(lookup_class(&m, "Circle").unwrap().simple_name, "Circle");
        assert_eq!(
            lookup_class(&m, "math::Helper").unwrap().simple_name,
            "Helper"
        );
        assert!(lookup_class(&m, "X").is_none());
    }

    #[test]
    fn lookup_on_empty_model_is_absent() {
        let m = CodeModel::empty("f");
        assert!(lookup_class(&m, "X").is_none());
    }

    #[test]
    fn serialize_is_deterministic_and_round_trips() {
        let m = sample_model();
        let a = serialize_model(&m);
        let b = serialize_model(&m);
        assert_eq!(a, b);
        let back = deserialize_model(&a).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn empty_model_serializes_with_empty_classes_array() {
        let m = CodeModel::empty("f.cpp");
        let text = String::from_utf8(serialize_model(&m)).unwrap();
        assert!(text.contains("\"classes\": []"), "{text}");
        assert_eq!(deserialize_model(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn interchange_uses_camel_case_keys() {
        let m = sample_model();
        let text = String::from_utf8(serialize_model(&m)).unwrap();
        for key in [
            "fileId",
            "simpleName",
            "templateParams",
            "startLine",
            "endColumn",
        ] {
            assert!(text.contains(key), "missing key {key} in {text}");
        }
    }

    #[test]
    fn duplicate_qualified_names_are_rejected() {
        let mut m = sample_model();
        m.classes.push(sample_class("Circle", ""));
        let data = serde_json::to_vec(&m).unwrap();
        let err = deserialize_model(&data).unwrap_err();
        assert!(err.path.contains("classes[2]"), "{err}");
        assert!(err.message.contains("Circle"), "{err}");
    }

    #[test]
    fn malformed_document_names_offending_path() {
        let err = deserialize_model(b"{\"fileId\": 3}").unwrap_err();
        assert_eq!(err.path, "$");
    }

    #[test]
    fn unresolved_generalization_child_is_rejected() {
        let mut m = sample_model();
        m.generalizations.push(Generalization {
            child: "Nope".into(),
            parent: "X".into(),
        });
        let data = serde_json::to_vec(&m).unwrap();
        assert!(deserialize_model(&data).is_err());
    }

    #[test]
    fn unresolved_parent_is_permitted() {
        // Parents declared outside the file stay as verbatim strings.
        let m = sample_model();
        assert!(validate_model(&m).is_ok());
    }

    #[test]
    fn type_ref_rendering() {
        let mut t = TypeRef::named("std::vector");
        t.template_args.push(TypeRef::named("int"));
        t.is_reference = true;
        assert_eq!(t.render(), "std::vector<int>&");
        let mut u = TypeRef::named("char");
        u.pointer_depth = 2;
        u.is_const = true;
        assert_eq!(u.render(), "const char**");
    }

    #[test]
    fn ancestor_paths_are_transitive() {
        let mut m = sample_model();
        m.classes.push(sample_class("Base", ""));
        m.generalizations.push(Generalization {
            child: "Circle".into(),
            parent: "Base".into(),
        });
        assert!(m.is_ancestor("math::Helper", "Base"));
        assert!(!m.is_ancestor("Base", "Circle"));
    }

    #[test]
    fn location_containment() {
        let outer = SourceLocation::new(1, 1, 10, 2);
        let inner = SourceLocation::new(2, 3, 4, 5);
        assert!(outer.contains(&inner));
        assert!(!inner.contains(&outer));
    }
}
