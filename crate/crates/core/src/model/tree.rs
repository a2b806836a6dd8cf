use super::alphabet::{OffspringConfig, TypeAlphabet};
use crate::{Error, Result};

/// One vertex of a [`TypedTree`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub ty: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Finite rooted planar tree with a type on every vertex. Child order is
/// significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedTree {
    nodes: Vec<Node>,
    root: usize,
}

impl TypedTree {
    /// Root-only tree.
    pub fn leaf(ty: usize) -> Self {
        Self { nodes: vec![Node { ty, parent: None, children: Vec::new() }], root: 0 }
    }

    /// Append a new rightmost child of `parent`; returns its index.
    pub fn add_child(&mut self, parent: usize, ty: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { ty, parent: Some(parent), children: Vec::new() });
        self.nodes[parent].children.push(id);
        id
    }

    /// Build from a preorder listing of `(type, arity)` pairs.
    pub fn from_preorder(code: &[(usize, usize)]) -> Result<Self> {
        let (&(root_ty, root_arity), rest) = code
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty preorder code".into()))?;
        let mut tree = Self::leaf(root_ty);
        // Stack of (vertex, children still to attach).
        let mut stack = vec![(0usize, root_arity)];
        for &(ty, arity) in rest {
            while matches!(stack.last(), Some(&(_, 0))) {
                stack.pop();
            }
            let top = stack
                .last_mut()
                .ok_or_else(|| Error::InvalidArgument("preorder code has too many vertices".into()))?;
            top.1 -= 1;
            let parent = top.0;
            let id = tree.add_child(parent, ty);
            stack.push((id, arity));
        }
        if stack.iter().any(|&(_, left)| left > 0) {
            return Err(Error::InvalidArgument("preorder code ends early".into()));
        }
        Ok(tree)
    }

    /// Preorder listing of `(type, arity)`; a complete, canonical encoding.
    pub fn preorder(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[v];
            out.push((node.ty, node.children.len()));
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn ty(&self, v: usize) -> usize {
        self.nodes[v].ty
    }

    pub fn root_type(&self) -> usize {
        self.nodes[self.root].ty
    }

    /// Offspring configuration `C(v)`: child types left to right.
    pub fn config(&self, v: usize) -> OffspringConfig {
        OffspringConfig::new(self.nodes[v].children.iter().map(|&c| self.nodes[c].ty).collect())
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((v, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(self.nodes[v].children.iter().map(|&c| (c, d + 1)));
        }
        best
    }

    /// Check the structural invariants: one root, consistent links, every
    /// vertex reachable from the root exactly once.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.root >= n || self.nodes[self.root].parent.is_some() {
            return Err(Error::InvalidArgument("root index invalid or root has a parent".into()));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!("vertex {v} reached twice")));
            }
            for &c in &self.nodes[v].children {
                if c >= n || self.nodes[c].parent != Some(v) {
                    return Err(Error::InvalidArgument(format!("broken link {v} -> {c}")));
                }
                stack.push(c);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("tree has unreachable vertices".into()));
        }
        Ok(())
    }

    /// Nested-parentheses rendering with type labels, e.g. `a(b,a(b,b))`.
    pub fn render(&self, alphabet: &TypeAlphabet) -> String {
        let mut out = String::new();
        self.render_into(self.root, alphabet, &mut out);
        out
    }

    fn render_into(&self, v: usize, alphabet: &TypeAlphabet, out: &mut String) {
        let node = &self.nodes[v];
        out.push_str(alphabet.label(node.ty));
        if !node.children.is_empty() {
            out.push('(');
            for (i, &c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.render_into(c, alphabet, out);
            }
            out.push(')');
        }
    }

    /// Inverse of [`TypedTree::render`].
    pub fn parse(text: &str, alphabet: &TypeAlphabet) -> Result<Self> {
        let bytes: Vec<char> = text.trim().chars().collect();
        let mut pos = 0;
        let label_char = |c: char| c.is_alphanumeric() || c == '_' || c == '-' || c == '.';
        let read_label = |pos: &mut usize| -> Result<usize> {
            let start = *pos;
            while *pos < bytes.len() && label_char(bytes[*pos]) {
                *pos += 1;
            }
            let label: String = bytes[start..*pos].iter().collect();
            alphabet
                .index_of(&label)
                .ok_or_else(|| Error::Parse(format!("unknown type label {label:?} at offset {start}")))
        };
        let root_ty = read_label(&mut pos)?;
        let mut tree = Self::leaf(root_ty);
        let mut current = 0usize;
        let mut last = 0usize;
        while pos < bytes.len() {
            match bytes[pos] {
                '(' => {
                    pos += 1;
                    current = last;
                    let ty = read_label(&mut pos)?;
                    last = tree.add_child(current, ty);
                }
                ',' => {
                    pos += 1;
                    if current == last {
                        return Err(Error::Parse(format!("unexpected ',' at offset {}", pos - 1)));
                    }
                    let ty = read_label(&mut pos)?;
                    last = tree.add_child(current, ty);
                }
                ')' => {
                    pos += 1;
                    if current == last {
                        return Err(Error::Parse(format!("unbalanced ')' at offset {}", pos - 1)));
                    }
                    last = current;
                    current = tree.nodes[current].parent.unwrap_or(current);
                    if last == tree.root && pos < bytes.len() {
                        return Err(Error::Parse(format!("trailing input at offset {pos}")));
                    }
                }
                c => return Err(Error::Parse(format!("unexpected {c:?} at offset {pos}"))),
            }
        }
        if current != last {
            return Err(Error::Parse("unclosed '('".into()));
        }
        Ok(tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> TypeAlphabet {
        TypeAlphabet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn render_and_parse_round_trip() {
        let mut t = TypedTree::leaf(0);
        t.add_child(0, 1);
        let c = t.add_child(0, 0);
        t.add_child(c, 1);
        t.add_child(c, 1);
        let s = t.render(&ab());
        assert_eq!(s, "a(b,a(b,b))");
        assert_eq!(TypedTree::parse(&s, &ab()).unwrap(), t);
        assert_eq!(t.height(), 2);
        assert_eq!(t.config(0), OffspringConfig::new(vec![1, 0]));
        t.validate().unwrap();
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "c", "a(", "a()", "a(b", "a(b))", "a,b", "a(b)(b)", "a(b,)"] {
            assert!(TypedTree::parse(bad, &ab()).is_err(), "{bad}");
        }
    }

    #[test]
    fn preorder_round_trip() {
        let t = TypedTree::parse("a(b(a,a),b,a(b))", &ab()).unwrap();
        let code = t.preorder();
        assert_eq!(code[0], (0, 3));
        assert_eq!(TypedTree::from_preorder(&code).unwrap(), t);
        assert!(TypedTree::from_preorder(&[(0, 2), (1, 0)]).is_err());
        assert!(TypedTree::from_preorder(&[(0, 0), (1, 0)]).is_err());
    }

    fn arb_code() -> impl Strategy<Value = Vec<(usize, usize)>> {
        // Random tree built by attaching each new vertex to a random earlier one.
        proptest::collection::vec((0usize..3, any::<prop::sample::Index>()), 0..20).prop_map(|steps| {
            let mut t = TypedTree::leaf(0);
            for (ty, idx) in steps {
                let parent = idx.index(t.size());
                t.add_child(parent, ty);
            }
            t.preorder()
        })
    }

    proptest! {
        #[test]
        fn render_parse_identity(code in arb_code()) {
            let alpha = TypeAlphabet::new(["x", "y", "z"]).unwrap();
            let t = TypedTree::from_preorder(&code).unwrap();
            t.validate().unwrap();
            let back = TypedTree::parse(&t.render(&alpha), &alpha).unwrap();
            prop_assert_eq!(back.preorder(), code);
        }
    }
}
