use serde::{Deserialize, Serialize};

/// Names the twelve coefficient functions of `J` (a, b) and `G` (c, d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coeff {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
    C1,
    C2,
    C3,
    D1,
    D2,
    D3,
}

impl Coeff {
    pub const ALL: [Coeff; 12] = [
        Coeff::A1,
        Coeff::A2,
        Coeff::A3,
        Coeff::B1,
        Coeff::B2,
        Coeff::B3,
        Coeff::C1,
        Coeff::C2,
        Coeff::C3,
        Coeff::D1,
        Coeff::D2,
        Coeff::D3,
    ];

    pub fn name(self) -> &'static str {
        [
            "a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3", "d1", "d2", "d3",
        ][self as usize]
    }

    pub fn from_name(s: &str) -> Option<Coeff> {
        Coeff::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl std::fmt::Display for Coeff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per coefficient: functions, jets, or plain numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T> Coeffs<T> {
    pub fn from_fn(mut f: impl FnMut(Coeff) -> T) -> Self {
        Coeffs {
            a1: f(Coeff::A1),
            a2: f(Coeff::A2),
            a3: f(Coeff::A3),
            b1: f(Coeff::B1),
            b2: f(Coeff::B2),
            b3: f(Coeff::B3),
            c1: f(Coeff::C1),
            c2: f(Coeff::C2),
            c3: f(Coeff::C3),
            d1: f(Coeff::D1),
            d2: f(Coeff::D2),
            d3: f(Coeff::D3),
        }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(Coeff) -> Result<T, E>) -> Result<Self, E> {
        Ok(Coeffs {
            a1: f(Coeff::A1)?,
            a2: f(Coeff::A2)?,
            a3: f(Coeff::A3)?,
            b1: f(Coeff::B1)?,
            b2: f(Coeff::B2)?,
            b3: f(Coeff::B3)?,
            c1: f(Coeff::C1)?,
            c2: f(Coeff::C2)?,
            c3: f(Coeff::C3)?,
            d1: f(Coeff::D1)?,
            d2: f(Coeff::D2)?,
            d3: f(Coeff::D3)?,
        })
    }

    pub fn get(&self, c: Coeff) -> &T {
        match c {
            Coeff::A1 => &self.a1,
            Coeff::A2 => &self.a2,
            Coeff::A3 => &self.a3,
            Coeff::B1 => &self.b1,
            Coeff::B2 => &self.b2,
            Coeff::B3 => &self.b3,
            Coeff::C1 => &self.c1,
            Coeff::C2 => &self.c2,
            Coeff::C3 => &self.c3,
            Coeff::D1 => &self.d1,
            Coeff::D2 => &self.d2,
            Coeff::D3 => &self.d3,
        }
    }

    pub fn get_mut(&mut self, c: Coeff) -> &mut T {
        match c {
            Coeff::A1 => &mut self.a1,
            Coeff::A2 => &mut self.a2,
            Coeff::A3 => &mut self.a3,
            Coeff::B1 => &mut self.b1,
            Coeff::B2 => &mut self.b2,
            Coeff::B3 => &mut self.b3,
            Coeff::C1 => &mut self.c1,
            Coeff::C2 => &mut self.c2,
            Coeff::C3 => &mut self.c3,
            Coeff::D1 => &mut self.d1,
            Coeff::D2 => &mut self.d2,
            Coeff::D3 => &mut self.d3,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Coeffs<U> {
        Coeffs::from_fn(|c| f(self.get(c)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coeff, &T)> {
        Coeff::ALL.into_iter().map(move |c| (c, self.get(c)))
    }
}
