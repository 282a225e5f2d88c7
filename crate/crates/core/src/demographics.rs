//! Per-user demographics and minority/majority group assignment.

use alloc::collections::BTreeMap;
use core::fmt;

use crate::ratings::UserId;

/// MovieLens-style age bucket codes.
pub const AGE_CODES: [u8; 7] = [1, 18, 25, 35, 45, 50, 56];

/// Age code at or above which a user counts as senior under the youth scheme.
pub const SENIOR_AGE_CODE: u8 = 45;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Female,
    Male,
}

/// One of the seven MovieLens age bucket codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct AgeCode(u8);

impl AgeCode {
    pub fn new(code: u8) -> Option<Self> {
        AGE_CODES.contains(&code).then_some(Self(code))
    }

    pub fn get(&self) -> u8 {
        self.0
    }

    pub fn is_senior(&self) -> bool {
        self.0 >= SENIOR_AGE_CODE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserDemographics {
    pub gender: Gender,
    pub age: AgeCode,
}

/// Demographics for the users that provided them. Users absent from the table
/// are legal; they get the "unknown" label downstream.
#[derive(Debug, Clone, Default)]
pub struct DemographicTable {
    records: BTreeMap<UserId, UserDemographics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicateUser(pub UserId);

impl fmt::Display for DuplicateUser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "user {} appears more than once in the demographic table", self.0)
    }
}

impl core::error::Error for DuplicateUser {}

impl DemographicTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, user: UserId, demo: UserDemographics) -> Result<(), DuplicateUser> {
        if self.records.insert(user, demo).is_some() {
            return Err(DuplicateUser(user));
        }
        Ok(())
    }

    pub fn get(&self, user: UserId) -> Option<&UserDemographics> {
        self.records.get(&user)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &UserDemographics)> {
        self.records.iter().map(|(&u, d)| (u, d))
    }

    pub fn count_gender(&self, gender: Gender) -> usize {
        self.records.values().filter(|d| d.gender == gender).count()
    }

    pub fn count_seniors(&self) -> usize {
        self.records.values().filter(|d| d.age.is_senior()).count()
    }
}

/// Which demographic bipartition defines the minority group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Minority = female, majority = male.
    Gender,
    /// Minority = senior (age code >= 45), majority = young.
    Youth,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Gender => write!(f, "gender"),
            Scheme::Youth => write!(f, "youth"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupLabel {
    Minority,
    Majority,
}

/// Minority/majority labeling of users under a scheme. Users without
/// demographics are simply absent ("unknown").
#[derive(Debug, Clone)]
pub struct GroupAssignment {
    scheme: Scheme,
    labels: BTreeMap<UserId, GroupLabel>,
}

impl GroupAssignment {
    /// Direct construction, mainly for tests and synthetic data.
    pub fn from_labels(scheme: Scheme, labels: BTreeMap<UserId, GroupLabel>) -> Self {
        Self { scheme, labels }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// `None` means the user has no demographic record (unknown).
    pub fn label(&self, user: UserId) -> Option<GroupLabel> {
        self.labels.get(&user).copied()
    }

    pub fn count(&self, label: GroupLabel) -> usize {
        self.labels.values().filter(|&&l| l == label).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, GroupLabel)> + '_ {
        self.labels.iter().map(|(&u, &l)| (u, l))
    }
}

/// Labels every user in the table per the scheme's minority definition.
pub fn assign_groups(demographics: &DemographicTable, scheme: Scheme) -> GroupAssignment {
    let labels = demographics
        .iter()
        .map(|(user, demo)| {
            let minority = match scheme {
                Scheme::Gender => demo.gender == Gender::Female,
                Scheme::Youth => demo.age.is_senior(),
            };
            let label = if minority { GroupLabel::Minority } else { GroupLabel::Majority };
            (user, label)
        })
        .collect();
    GroupAssignment { scheme, labels }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo(gender: Gender, age: u8) -> UserDemographics {
        UserDemographics { gender, age: AgeCode::new(age).unwrap() }
    }

    #[test]
    fn gender_scheme_marks_female_minority() {
        let mut t = DemographicTable::new();
        t.insert(1, demo(Gender::Female, 25)).unwrap();
        t.insert(2, demo(Gender::Male, 25)).unwrap();
        let g = assign_groups(&t, Scheme::Gender);
        assert_eq!(g.label(1), Some(GroupLabel::Minority));
        assert_eq!(g.label(2), Some(GroupLabel::Majority));
        assert_eq!(g.label(3), None, "user without demographics is unknown");
    }

    #[test]
    fn youth_scheme_cuts_at_age_code_45() {
        let mut t = DemographicTable::new();
        t.insert(1, demo(Gender::Male, 45)).unwrap();
        t.insert(2, demo(Gender::Male, 35)).unwrap();
        t.insert(3, demo(Gender::Female, 56)).unwrap();
        let g = assign_groups(&t, Scheme::Youth);
        assert_eq!(g.label(1), Some(GroupLabel::Minority), "45 is senior");
        assert_eq!(g.label(2), Some(GroupLabel::Majority), "35 is young");
        assert_eq!(g.label(3), Some(GroupLabel::Minority));
    }

    #[test]
    fn rejects_invalid_age_codes() {
        assert!(AgeCode::new(44).is_none());
        assert!(AgeCode::new(18).is_some());
    }

    #[test]
    fn rejects_duplicate_users() {
        let mut t = DemographicTable::new();
        t.insert(1, demo(Gender::Female, 1)).unwrap();
        assert_eq!(t.insert(1, demo(Gender::Male, 25)), Err(DuplicateUser(1)));
    }
}
