//! Shared server state and the background job runner.
//!
//! Reads take a short shared lock on the store. Pipeline jobs run on the
//! blocking pool against a working copy of their space; progress is applied
//! to the store as events arrive and the copy is committed at the end.
//! Jobs on the same space are serialized by a per-space lock, so their node
//! ids never collide.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use dspace_core::model::{DesignSpace, SpaceId};
use dspace_core::pipeline::{GenerationEvent, Pipeline, PipelineError, RunStats};
use dspace_core::store::Store;

use crate::runs::{RunFeed, RunId, RunRegistry};

pub struct AppState {
    pub store: RwLock<Store>,
    pub pipeline: Pipeline,
    pub runs: RunRegistry,
    pub store_path: Option<PathBuf>,
    space_locks: Mutex<HashMap<SpaceId, Arc<Mutex<()>>>>,
}

pub type Shared = Arc<AppState>;

/// What a job does with its working copy of the space.
pub type Job =
    Box<dyn FnOnce(&Pipeline, &mut DesignSpace, &Sink<'_>) -> Result<(), PipelineError> + Send>;

/// Event callback handed to jobs.
pub type Sink<'a> = dyn Fn(GenerationEvent) + Sync + 'a;

impl AppState {
    pub fn new(store: Store, pipeline: Pipeline, store_path: Option<PathBuf>) -> Shared {
        Arc::new(Self {
            store: RwLock::new(store),
            pipeline,
            runs: RunRegistry::default(),
            store_path,
            space_locks: Mutex::new(HashMap::new()),
        })
    }

    fn space_lock(&self, id: SpaceId) -> Arc<Mutex<()>> {
        self.space_locks.lock().entry(id).or_default().clone()
    }

    /// Starts `job` on the blocking pool and returns its run id at once.
    pub fn spawn_job(self: &Arc<Self>, space: SpaceId, pipeline: Pipeline, job: Job) -> RunId {
        let (run, feed) = self.runs.start();
        let state = self.clone();
        tokio::task::spawn_blocking(move || state.run_job(space, &pipeline, &feed, job));
        run
    }

    fn run_job(&self, id: SpaceId, pipeline: &Pipeline, feed: &RunFeed, job: Job) {
        let lock = self.space_lock(id);
        let _guard = lock.lock();
        let Ok(mut working) = self.store.read().space(id).cloned() else {
            feed.push(aborted(format!("space {id} no longer exists")));
            return;
        };
        let apply = |event: GenerationEvent| {
            self.apply(id, &event);
            feed.push(event);
        };
        let result = job(pipeline, &mut working, &apply);
        // A store reload during the run may have removed the space; the
        // feed still ends with `done` either way.
        let _ = self.store.write().commit_space(working);
        if let Err(e) = result {
            if !feed.is_done() {
                feed.push(aborted(e.to_string()));
            }
        }
    }

    fn apply(&self, id: SpaceId, event: &GenerationEvent) {
        let mut store = self.store.write();
        let _ = match event {
            GenerationEvent::DimensionsReady { dimensions } => {
                store.set_dimensions(id, dimensions.clone())
            }
            GenerationEvent::NodeReady { node } => store.upsert_node(id, node.clone()),
            _ => Ok(()),
        };
    }
}

fn aborted(reason: String) -> GenerationEvent {
    GenerationEvent::Done {
        stats: RunStats {
            aborted: Some(reason),
            ..RunStats::default()
        },
    }
}
