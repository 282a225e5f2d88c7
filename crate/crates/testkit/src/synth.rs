//! Seeded synthetic dataset with a built-in demographic bias.
//!
//! The generator mirrors the structure that makes real rating data biased
//! rather than any measured outcome: the minority group is smaller, every
//! item carries a group loading (negative = minority-leaning), users vote
//! more often on their own side, strongly loaded items are nicher (less
//! popular, so fewer votes), and ratings mix the group affinity with a small
//! personal taste and noise. Gender and age are aligned with the same latent
//! group so both schemes are exercised by one fixture.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use fairrec_core::demographics::{
    AgeCode, DemographicTable, Gender, UserDemographics,
};
use fairrec_core::ratings::{RatingMatrix, RatingMatrixBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    pub minority_fraction: f64,
    pub mean_votes_per_user: usize,
    /// Strength of the group-affinity term in the latent rating.
    pub bias_strength: f64,
    /// Dimension and strength of the personal taste term.
    pub taste_factors: usize,
    pub taste_strength: f64,
    /// Uniform rating noise half-width.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            users: 1200,
            items: 260,
            minority_fraction: 0.3,
            mean_votes_per_user: 70,
            bias_strength: 1.4,
            taste_factors: 3,
            taste_strength: 0.8,
            noise: 0.6,
            seed: 202401,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SynthUser {
    pub id: u32,
    pub gender: Gender,
    pub age: u8,
    pub minority: bool,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub users: Vec<SynthUser>,
    /// (user id, item id, rating) with ids starting at 1.
    pub ratings: Vec<(u32, u32, u8)>,
    /// Ground-truth item group loadings, for diagnostics only.
    pub item_loadings: Vec<f64>,
}

impl SynthDataset {
    pub fn matrix(&self) -> RatingMatrix {
        let mut b = RatingMatrixBuilder::new(5);
        for &(u, i, r) in &self.ratings {
            b.add(u, i, r).unwrap();
        }
        b.build()
    }

    pub fn demographics(&self) -> DemographicTable {
        let mut t = DemographicTable::new();
        for u in &self.users {
            t.insert(
                u.id,
                UserDemographics { gender: u.gender, age: AgeCode::new(u.age).unwrap() },
            )
            .unwrap();
        }
        t
    }

    /// users.dat lines in MovieLens form: `UserID::Gender::Age::Occupation::Zip`.
    pub fn users_dat(&self) -> String {
        let mut s = String::new();
        for u in &self.users {
            let g = match u.gender {
                Gender::Female => 'F',
                Gender::Male => 'M',
            };
            let _ = writeln!(s, "{}::{}::{}::{}::{:05}", u.id, g, u.age, u.id % 21, u.id % 100_000);
        }
        s
    }

    /// ratings.dat lines in MovieLens form: `UserID::MovieID::Rating::Timestamp`.
    pub fn ratings_dat(&self) -> String {
        let mut s = String::new();
        for (k, &(u, i, r)) in self.ratings.iter().enumerate() {
            let _ = writeln!(s, "{}::{}::{}::{}", u, i, r, 978_300_000 + k as u64);
        }
        s
    }

    pub fn write_movielens(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("ratings.dat"), self.ratings_dat())?;
        fs::write(dir.join("users.dat"), self.users_dat())?;
        Ok(())
    }
}

pub fn generate(cfg: &SynthConfig) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.taste_factors.max(1);

    let young = [1u8, 18, 25, 35];
    let senior = [45u8, 50, 56];
    let users: Vec<SynthUser> = (1..=cfg.users as u32)
        .map(|id| {
            let minority = rng.gen_bool(cfg.minority_fraction);
            let gender = if minority { Gender::Female } else { Gender::Male };
            let age = if minority {
                senior[rng.gen_range(0..senior.len())]
            } else {
                young[rng.gen_range(0..young.len())]
            };
            SynthUser { id, gender, age, minority }
        })
        .collect();

    let user_taste: Vec<Vec<f64>> = (0..cfg.users)
        .map(|_| (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();

    let item_loadings: Vec<f64> = (0..cfg.items).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let item_taste: Vec<Vec<f64>> = (0..cfg.items)
        .map(|_| (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();

    // Zipf-flavoured popularity damped for strongly loaded (niche) items.
    let mut ranks: Vec<usize> = (0..cfg.items).collect();
    for i in (1..ranks.len()).rev() {
        let j = rng.gen_range(0..=i);
        ranks.swap(i, j);
    }
    let popularity: Vec<f64> = (0..cfg.items)
        .map(|i| {
            let zipf = 1.0 / (ranks[i] as f64 + 1.5).powf(0.7);
            let niche = 1.25 - item_loadings[i].abs();
            (zipf * niche).max(1e-4)
        })
        .collect();

    let mut ratings = Vec::new();
    for (uidx, user) in users.iter().enumerate() {
        let g = if user.minority { -1.0 } else { 1.0 };
        let span = cfg.mean_votes_per_user as f64;
        let votes = rng.gen_range((span * 0.5) as usize..=(span * 1.5) as usize).min(cfg.items);

        // weighted sample without replacement: smallest exponential keys win
        let mut keyed: Vec<(f64, usize)> = (0..cfg.items)
            .map(|i| {
                let own_side = (g * item_loadings[i]).max(0.0);
                let w = popularity[i] * (1.0 + 0.6 * own_side);
                let u: f64 = rng.gen_range(1e-12..1.0);
                (-u.ln() / w, i)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));

        for &(_, i) in keyed.iter().take(votes) {
            let affinity = cfg.bias_strength * g * item_loadings[i];
            let taste: f64 = user_taste[uidx]
                .iter()
                .zip(&item_taste[i])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * cfg.taste_strength
                / k as f64;
            let noise = rng.gen_range(-cfg.noise..=cfg.noise);
            let value = 3.0 + affinity + taste + noise;
            let r = value.round().clamp(1.0, 5.0) as u8;
            ratings.push((user.id, i as u32 + 1, r));
        }
    }

    SynthDataset { users, ratings, item_loadings }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig { users: 50, items: 30, seed: 3, ..Default::default() };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.ratings, b.ratings);
    }

    #[test]
    fn matrix_round_trips_counts() {
        let cfg = SynthConfig { users: 40, items: 25, mean_votes_per_user: 10, ..Default::default() };
        let d = generate(&cfg);
        let m = d.matrix();
        assert_eq!(m.num_entries(), d.ratings.len());
        assert_eq!(m.num_users(), 40, "every user votes at least once");
    }
}
