//! Writes generated source trees as git commits with fixed identities and
//! timestamps, so the same script always yields the same commit ids.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use git2::{FileMode, Oid, Repository, Signature, Time};

pub const BASE_TIME: i64 = 1_700_000_000;

pub struct RepoWriter {
    pub repo: Repository,
    tick: i64,
    head: Option<Oid>,
    /// Last blob written per path, to skip re-hashing unchanged files.
    blobs: HashMap<String, (String, Oid)>,
}

#[derive(Default)]
struct Dir<'a> {
    files: BTreeMap<&'a str, Oid>,
    dirs: BTreeMap<&'a str, Dir<'a>>,
}

impl<'a> Dir<'a> {
    fn insert(&mut self, path: &'a str, blob: Oid) {
        match path.split_once('/') {
            Some((head, rest)) => self.dirs.entry(head).or_default().insert(rest, blob),
            None => {
                self.files.insert(path, blob);
            }
        }
    }

    fn write(&self, repo: &Repository) -> Result<Oid, git2::Error> {
        let mut builder = repo.treebuilder(None)?;
        for (name, blob) in &self.files {
            builder.insert(name, *blob, FileMode::Blob.into())?;
        }
        for (name, dir) in &self.dirs {
            let tree = dir.write(repo)?;
            builder.insert(name, tree, FileMode::Tree.into())?;
        }
        builder.write()
    }
}

impl RepoWriter {
    pub fn init(path: &Path) -> Result<Self, git2::Error> {
        let repo = Repository::init(path)?;
        Ok(RepoWriter { repo, tick: 0, head: None, blobs: HashMap::new() })
    }

    pub fn head(&self) -> Option<Oid> {
        self.head
    }

    fn signature(&mut self) -> Result<Signature<'static>, git2::Error> {
        self.tick += 1;
        Signature::new("Fixture Author", "fixtures@example.com", &Time::new(BASE_TIME + self.tick * 3600, 0))
    }

    fn write_tree(&mut self, files: &BTreeMap<String, String>) -> Result<Oid, git2::Error> {
        let mut root = Dir::default();
        for (path, content) in files {
            let oid = match self.blobs.get(path) {
                Some((text, oid)) if text == content => *oid,
                _ => {
                    let oid = self.repo.blob(content.as_bytes())?;
                    self.blobs.insert(path.clone(), (content.clone(), oid));
                    oid
                }
            };
            root.insert(path, oid);
        }
        root.write(&self.repo)
    }

    /// Commits exactly `files` as the new tree on top of HEAD.
    pub fn commit(&mut self, files: &BTreeMap<String, String>, message: &str) -> Result<Oid, git2::Error> {
        let parents: Vec<Oid> = self.head.into_iter().collect();
        let oid = self.commit_with_parents(files, message, &parents, true)?;
        Ok(oid)
    }

    /// Commits with explicit parents. HEAD moves only when `advance` is set.
    pub fn commit_with_parents(
        &mut self,
        files: &BTreeMap<String, String>,
        message: &str,
        parents: &[Oid],
        advance: bool,
    ) -> Result<Oid, git2::Error> {
        let sig = self.signature()?;
        let tree_id = self.write_tree(files)?;
        let tree = self.repo.find_tree(tree_id)?;
        let parent_commits = parents.iter().map(|p| self.repo.find_commit(*p)).collect::<Result<Vec<_>, _>>()?;
        let parent_refs: Vec<&git2::Commit<'_>> = parent_commits.iter().collect();
        let update_ref = if advance { Some("HEAD") } else { None };
        let oid = self.repo.commit(update_ref, &sig, &sig, message, &tree, &parent_refs)?;
        if advance {
            self.head = Some(oid);
        }
        Ok(oid)
    }

    /// Checks the final tree out into the working directory.
    pub fn finish(self) -> Result<Repository, git2::Error> {
        if self.head.is_some() {
            self.repo.checkout_head(Some(git2::build::CheckoutBuilder::new().force()))?;
        }
        Ok(self.repo)
    }
}
