use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rdf::Triple;

/// A switchable stage of model generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    Ac2Cav,
    Ac2Sdf,
    Ac2Vav,
    Cav2Sdf,
    PointConnection,
    Tagging,
    Reasoning,
}

impl Module {
    pub const ALL: [Module; 7] = [
        Module::Ac2Cav,
        Module::Ac2Sdf,
        Module::Ac2Vav,
        Module::Cav2Sdf,
        Module::PointConnection,
        Module::Tagging,
        Module::Reasoning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Ac2Cav => "ac2cav",
            Module::Ac2Sdf => "ac2sdf",
            Module::Ac2Vav => "ac2vav",
            Module::Cav2Sdf => "cav2sdf",
            Module::PointConnection => "point_connection",
            Module::Tagging => "tagging",
            Module::Reasoning => "reasoning",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Module {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Module::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| format!("unknown module {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModuleToggles {
    pub ac2cav: bool,
    pub ac2sdf: bool,
    pub ac2vav: bool,
    pub cav2sdf: bool,
    pub point_connection: bool,
    pub tagging: bool,
    pub reasoning: bool,
}

impl Default for ModuleToggles {
    fn default() -> Self {
        Self::all()
    }
}

impl ModuleToggles {
    pub fn all() -> Self {
        ModuleToggles {
            ac2cav: true,
            ac2sdf: true,
            ac2vav: true,
            cav2sdf: true,
            point_connection: true,
            tagging: true,
            reasoning: true,
        }
    }

    pub fn none() -> Self {
        ModuleToggles {
            ac2cav: false,
            ac2sdf: false,
            ac2vav: false,
            cav2sdf: false,
            point_connection: false,
            tagging: false,
            reasoning: false,
        }
    }

    fn slot(&mut self, m: Module) -> &mut bool {
        match m {
            Module::Ac2Cav => &mut self.ac2cav,
            Module::Ac2Sdf => &mut self.ac2sdf,
            Module::Ac2Vav => &mut self.ac2vav,
            Module::Cav2Sdf => &mut self.cav2sdf,
            Module::PointConnection => &mut self.point_connection,
            Module::Tagging => &mut self.tagging,
            Module::Reasoning => &mut self.reasoning,
        }
    }

    pub fn enabled(&self, m: Module) -> bool {
        let mut copy = *self;
        *copy.slot(m)
    }

    pub fn set(&mut self, m: Module, on: bool) {
        *self.slot(m) = on;
    }

    pub fn without(mut self, m: Module) -> Self {
        self.set(m, false);
        self
    }

    pub fn enabled_modules(&self) -> Vec<Module> {
        Module::ALL.into_iter().filter(|m| self.enabled(*m)).collect()
    }
}

/// Comma list of enabled modules; `all` and `none` are accepted.
impl FromStr for ModuleToggles {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut t = ModuleToggles::none();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => t = ModuleToggles::all(),
                "none" => t = ModuleToggles::none(),
                _ => t.set(part.parse()?, true),
            }
        }
        Ok(t)
    }
}

impl fmt::Display for ModuleToggles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.enabled_modules().into_iter().map(Module::name).collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

/// Modules a derivation depends on; the empty route is unconditional.
pub type Route = BTreeSet<Module>;

/// Every derivation route of every planned triple. A triple is emitted
/// when at least one of its routes is fully enabled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    routes: BTreeMap<Triple, Vec<Route>>,
}

impl Provenance {
    /// Records a route, keeping only minimal ones.
    pub fn add(&mut self, triple: Triple, route: Route) {
        let routes = self.routes.entry(triple).or_default();
        if routes.iter().any(|r| r.is_subset(&route)) {
            return;
        }
        routes.retain(|r| !route.is_subset(r));
        routes.push(route);
        routes.sort();
    }

    pub fn routes(&self, t: &Triple) -> Option<&[Route]> {
        self.routes.get(t).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Triple, &[Route])> {
        self.routes.iter().map(|(t, r)| (t, r.as_slice()))
    }

    pub fn is_emitted(routes: &[Route], toggles: &ModuleToggles) -> bool {
        routes.iter().any(|r| r.iter().all(|m| toggles.enabled(*m)))
    }

    pub fn emitted(&self, toggles: &ModuleToggles) -> impl Iterator<Item = &Triple> {
        let toggles = *toggles;
        self.routes
            .iter()
            .filter(move |(_, r)| Self::is_emitted(r, &toggles))
            .map(|(t, _)| t)
    }

    /// Triples that every derivation owes to `m`: exactly what disappears
    /// when `m` alone is switched off.
    pub fn module_triples(&self, m: Module) -> BTreeSet<Triple> {
        self.routes
            .iter()
            .filter(|(_, routes)| routes.iter().all(|r| r.contains(&m)))
            .map(|(t, _)| t.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let t: ModuleToggles = "point_connection".parse().unwrap();
        assert!(t.point_connection && !t.tagging && !t.ac2cav);
        assert_eq!(t.to_string(), "point_connection");
        assert_eq!("all".parse::<ModuleToggles>().unwrap(), ModuleToggles::all());
        assert_eq!("".parse::<ModuleToggles>().unwrap(), ModuleToggles::none());
        assert!("warp".parse::<ModuleToggles>().is_err());
        assert!(!ModuleToggles::all().without(Module::Tagging).enabled(Module::Tagging));
    }

    #[test]
    fn minimal_routes() {
        use crate::rdf::{Iri, Term};
        let i = |s: &str| Iri::new(format!("http://x/{s}")).unwrap();
        let t = Triple::new(i("a"), i("p"), Term::Iri(i("b")));
        let mut p = Provenance::default();
        p.add(t.clone(), [Module::Tagging, Module::Reasoning].into());
        p.add(t.clone(), [Module::Tagging].into());
        p.add(t.clone(), [Module::Tagging, Module::Ac2Cav].into());
        assert_eq!(p.routes(&t).unwrap(), [Route::from([Module::Tagging])]);
        assert_eq!(p.module_triples(Module::Tagging).len(), 1);
        assert!(p.module_triples(Module::Reasoning).is_empty());
    }
}
