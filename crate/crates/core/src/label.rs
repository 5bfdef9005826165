use std::fmt;
use std::sync::Arc;

/// The square symbol, used as the default node and edge label.
pub const BOX: &str = "□";
/// The triangle symbol marking visited nodes in the tree systems.
pub const TRIANGLE: &str = "△";
/// The point symbol of flow diagrams.
pub const BULLET: &str = "•";
/// The decision symbol of flow diagrams.
pub const DIAMOND: &str = "◇";

/// A label symbol. Cheap to clone; compared by string content.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The square symbol.
    pub fn box_() -> Self {
        Label::new(BOX)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(Arc::from(s))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}
