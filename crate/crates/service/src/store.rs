//! File-backed story records with per-story compare-and-set.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use storyline_core::{
    layout_document, render_story, to_canonical_json, validate_story, HealthStory, LayoutConfig, StyleConfig,
    Violation,
};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoryRecord {
    pub id: String,
    pub revision: u64,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
    pub story: HealthStory,
}

/// Layout document and SVG for one revision.
#[derive(Debug)]
pub struct Artifacts {
    pub layout: String,
    pub svg: String,
}

type Slot = Arc<RwLock<StoryRecord>>;

/// Records in memory, mirrored to one JSON document per story.
pub struct Store {
    dir: PathBuf,
    records: RwLock<HashMap<String, Slot>>,
    cache: Mutex<HashMap<(String, u64), Arc<Artifacts>>>,
    layout: LayoutConfig,
    style: StyleConfig,
}

fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(3)
}

fn new_violations(before: &[Violation], after: Vec<Violation>) -> Vec<Violation> {
    let known: HashSet<(&str, _)> = before.iter().map(|v| (v.event_id.as_str(), v.rule)).collect();
    after
        .into_iter()
        .filter(|v| !known.contains(&(v.event_id.as_str(), v.rule)))
        .collect()
}

impl Store {
    /// Opens `dir`, creating it if needed, and loads every record in it.
    pub fn open(
        dir: impl Into<PathBuf>,
        layout: LayoutConfig,
        style: StyleConfig,
    ) -> Result<Self, ServiceError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut records = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = fs::read_to_string(&path)?;
            let record: StoryRecord = serde_json::from_str(&text)
                .map_err(|e| ServiceError::Internal(format!("{}: {e}", path.display())))?;
            records.insert(record.id.clone(), Arc::new(RwLock::new(record)));
        }
        tracing::info!(dir = %dir.display(), stories = records.len(), "store opened");
        Ok(Self {
            dir,
            records: RwLock::new(records),
            cache: Mutex::new(HashMap::new()),
            layout,
            style,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.records.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn persist(&self, record: &StoryRecord) -> Result<(), ServiceError> {
        let final_path = self.path_of(&record.id);
        let tmp = self
            .dir
            .join(format!(".{}.{}.tmp", record.id, uuid::Uuid::new_v4().simple()));
        let mut file = fs::File::create(&tmp)?;
        file.write_all(to_canonical_json(record).as_bytes())?;
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, &final_path)?;
        Ok(())
    }

    fn slot(&self, id: &str) -> Result<Slot, ServiceError> {
        self.records
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("story {id:?}")))
    }

    /// Stores a new story at revision 1.
    pub fn create(&self, story: HealthStory) -> Result<StoryRecord, ServiceError> {
        let t = now();
        let record = StoryRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            revision: 1,
            created: t,
            updated: t,
            story,
        };
        self.persist(&record)?;
        self.records
            .write()
            .expect("store lock")
            .insert(record.id.clone(), Arc::new(RwLock::new(record.clone())));
        Ok(record)
    }

    pub fn get(&self, id: &str) -> Result<StoryRecord, ServiceError> {
        Ok(self.slot(id)?.read().expect("record lock").clone())
    }

    /// Applies `mutate` to a copy of the story and commits it as the next
    /// revision. Fails with a conflict when `expected` is given and differs
    /// from the current revision, and with the offending violations when the
    /// mutation introduces any.
    pub fn update<F>(&self, id: &str, expected: Option<u64>, mutate: F) -> Result<StoryRecord, ServiceError>
    where
        F: FnOnce(&mut HealthStory) -> Result<(), ServiceError>,
    {
        let slot = self.slot(id)?;
        let mut record = slot.write().expect("record lock");
        if let Some(expected) = expected {
            if expected != record.revision {
                return Err(ServiceError::Conflict {
                    expected,
                    current: record.revision,
                });
            }
        }
        let mut story = record.story.clone();
        mutate(&mut story)?;
        let introduced = new_violations(&validate_story(&record.story), validate_story(&story));
        if !introduced.is_empty() {
            return Err(ServiceError::Invalid(introduced));
        }
        let next = StoryRecord {
            id: record.id.clone(),
            revision: record.revision + 1,
            created: record.created,
            updated: now(),
            story,
        };
        self.persist(&next)?;
        let stale = record.revision;
        *record = next.clone();
        drop(record);
        self.cache
            .lock()
            .expect("cache lock")
            .remove(&(id.to_owned(), stale));
        Ok(next)
    }

    /// Layout and SVG of the current revision, computed once per revision.
    pub fn artifacts(&self, id: &str) -> Result<(StoryRecord, Arc<Artifacts>), ServiceError> {
        let record = self.get(id)?;
        let key = (record.id.clone(), record.revision);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok((record, hit.clone()));
        }
        let (layout, svg) = render_story(&record.story, &self.layout, &self.style)
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        let artifacts = Arc::new(Artifacts {
            layout: layout_document(&layout),
            svg,
        });
        let mut cache = self.cache.lock().expect("cache lock");
        cache.retain(|(cid, _), _| *cid != record.id);
        cache.insert(key, artifacts.clone());
        Ok((record, artifacts))
    }

    pub fn layout_config(&self) -> &LayoutConfig {
        &self.layout
    }
}
