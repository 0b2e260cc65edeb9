//! Name-keyed registries of interchangeable strategies.
//!
//! A strategy spec is `name` or `name:param`; the factory receives the optional
//! parameter string and builds a boxed trait object.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type Factory<T> = fn(Option<&str>) -> Result<Box<T>>;

pub struct Entry<T: ?Sized> {
    pub description: &'static str,
    pub factory: Factory<T>,
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Entry<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, description: &'static str, factory: Factory<T>) {
        self.entries.insert(name, Entry { description, factory });
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|(k, e)| (*k, e.description)).collect()
    }

    pub fn create(&self, spec: &str) -> Result<Box<T>> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        let entry = self.entries.get(name).ok_or_else(|| Error::UnknownStrategy {
            registry: self.kind,
            name: name.to_string(),
            known: self.names().join(", "),
        })?;
        (entry.factory)(param)
    }
}

/// Parses a required numeric strategy parameter.
pub fn required_param<N: std::str::FromStr>(param: Option<&str>, what: &str) -> Result<N> {
    let p = param.ok_or_else(|| Error::Argument(format!("strategy needs a parameter: {what}")))?;
    p.parse()
        .map_err(|_| Error::Argument(format!("cannot parse '{p}' as {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Shape {
        fn area(&self) -> f64;
    }
    struct Square(f64);
    impl Shape for Square {
        fn area(&self) -> f64 {
            self.0 * self.0
        }
    }

    #[test]
    fn create_by_name() {
        let mut r: Registry<dyn Shape> = Registry::new("shape");
        r.register("square", "side^2", |p| {
            Ok(Box::new(Square(required_param(p, "side")?)))
        });
        assert_eq!(r.create("square:3").unwrap().area(), 9.0);
        assert!(r.create("square").is_err());
        let e = r.create("circle").err().unwrap();
        assert!(e.to_string().contains("known: square"));
        assert_eq!(r.names(), vec!["square"]);
    }
}
