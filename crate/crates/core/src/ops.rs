//! The fixed operator table.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assoc {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpDef {
    pub priority: u16,
    pub assoc: Assoc,
}

impl OpDef {
    /// Maximum priorities of the (left, right) arguments.
    pub fn arg_limits(self) -> (u16, u16) {
        let p = self.priority;
        match self.assoc {
            Assoc::Xfx => (p - 1, p - 1),
            Assoc::Xfy => (p - 1, p),
            Assoc::Yfx => (p, p - 1),
            Assoc::Fy => (0, p),
            Assoc::Fx => (0, p - 1),
        }
    }
}

pub const MAX_PRIORITY: u16 = 1200;
pub const ARG_PRIORITY: u16 = 999;

pub fn infix(name: &str) -> Option<OpDef> {
    let (priority, assoc) = match name {
        ":-" => (1200, Assoc::Xfx),
        ";" => (1100, Assoc::Xfy),
        "->" => (1050, Assoc::Xfy),
        "," => (1000, Assoc::Xfy),
        "=" | "\\=" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" | "is" => (700, Assoc::Xfx),
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "/" | "//" | "mod" => (400, Assoc::Yfx),
        _ => return None,
    };
    Some(OpDef { priority, assoc })
}

pub fn prefix(name: &str) -> Option<OpDef> {
    let (priority, assoc) = match name {
        "-" => (200, Assoc::Fy),
        "\\+" => (900, Assoc::Fy),
        // directives only
        ":-" => (1200, Assoc::Fx),
        _ => return None,
    };
    Some(OpDef { priority, assoc })
}

pub fn is_op(name: &str) -> bool {
    infix(name).is_some() || prefix(name).is_some()
}
