use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Per-node production and demand categories of a TP energy simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Hydro,
    Flexible,
    Thermal,
    Nuclear,
    Vres,
    Demand,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Hydro,
        Category::Flexible,
        Category::Thermal,
        Category::Nuclear,
        Category::Vres,
        Category::Demand,
    ];

    /// Controllable categories ramp around TP shifts; the rest follow a spline.
    pub fn is_controllable(self) -> bool {
        matches!(
            self,
            Category::Hydro | Category::Flexible | Category::Thermal | Category::Nuclear
        )
    }

    /// Short-term flexibility may consume as well as produce.
    pub fn is_nonnegative(self) -> bool {
        self != Category::Flexible
    }

    pub fn is_production(self) -> bool {
        self != Category::Demand
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Hydro => "hydro",
            Category::Flexible => "flexible",
            Category::Thermal => "thermal",
            Category::Nuclear => "nuclear",
            Category::Vres => "vres",
            Category::Demand => "demand",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// Values for every category of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct PerCategory<T> {
    pub hydro: T,
    pub flexible: T,
    pub thermal: T,
    pub nuclear: T,
    pub vres: T,
    pub demand: T,
}

impl<T> PerCategory<T> {
    pub fn from_fn(mut f: impl FnMut(Category) -> T) -> Self {
        PerCategory {
            hydro: f(Category::Hydro),
            flexible: f(Category::Flexible),
            thermal: f(Category::Thermal),
            nuclear: f(Category::Nuclear),
            vres: f(Category::Vres),
            demand: f(Category::Demand),
        }
    }

    pub fn get(&self, c: Category) -> &T {
        match c {
            Category::Hydro => &self.hydro,
            Category::Flexible => &self.flexible,
            Category::Thermal => &self.thermal,
            Category::Nuclear => &self.nuclear,
            Category::Vres => &self.vres,
            Category::Demand => &self.demand,
        }
    }

    pub fn get_mut(&mut self, c: Category) -> &mut T {
        match c {
            Category::Hydro => &mut self.hydro,
            Category::Flexible => &mut self.flexible,
            Category::Thermal => &mut self.thermal,
            Category::Nuclear => &mut self.nuclear,
            Category::Vres => &mut self.vres,
            Category::Demand => &mut self.demand,
        }
    }

    pub fn try_map<U, E>(self, mut f: impl FnMut(Category, T) -> Result<U, E>) -> Result<PerCategory<U>, E> {
        Ok(PerCategory {
            hydro: f(Category::Hydro, self.hydro)?,
            flexible: f(Category::Flexible, self.flexible)?,
            thermal: f(Category::Thermal, self.thermal)?,
            nuclear: f(Category::Nuclear, self.nuclear)?,
            vres: f(Category::Vres, self.vres)?,
            demand: f(Category::Demand, self.demand)?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, &T)> {
        Category::ALL.into_iter().map(move |c| (c, self.get(c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), c);
        }
        assert!("wind".parse::<Category>().is_err());
    }
}
