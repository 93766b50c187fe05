//! FIFO task pool drained by a fixed set of render workers.

use std::collections::{HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::Instant;

use pixdrive_core::render::render_classgrid_with_stats;
use pixdrive_core::{ClassGrid, Dataset};
use tokio::sync::oneshot;

use crate::cache::{ResultPool, TaskKey};
use crate::error::ServiceError;
use crate::metrics::Metrics;

/// A finished render as seen by every request waiting on it.
#[derive(Clone, Debug)]
pub struct RenderOutcome {
    pub grid: Arc<ClassGrid>,
    /// Position in the global completion order, starting at 1.
    pub sequence: u64,
}

pub type RenderResult = Result<RenderOutcome, String>;

/// What [`WorkerPool::submit`] did with a request.
#[derive(Debug)]
pub enum Submission {
    /// Already in the result pool.
    Cached(Arc<ClassGrid>),
    /// Waiting on a task, new or already in flight.
    Pending(oneshot::Receiver<RenderResult>),
}

/// Called before each render attempt; returning true makes the attempt panic.
pub type FaultHook = Arc<dyn Fn(&TaskKey, u32) -> bool + Send + Sync>;

struct Task {
    key: TaskKey,
    dataset: Arc<Dataset>,
    attempt: u32,
}

struct Queue {
    tasks: VecDeque<Task>,
    shutdown: bool,
}

struct Shared {
    queue: Mutex<Queue>,
    ready: Condvar,
    capacity: usize,
    in_flight: Mutex<HashMap<TaskKey, Vec<oneshot::Sender<RenderResult>>>>,
    results: Option<Arc<ResultPool>>,
    metrics: Arc<Metrics>,
    threads_per_worker: usize,
    completed: AtomicU64,
    fault: Mutex<Option<FaultHook>>,
}

pub struct WorkerPool {
    shared: Arc<Shared>,
    handles: Mutex<Vec<JoinHandle<()>>>,
}

impl WorkerPool {
    /// Starts `workers` threads. Finished grids go to `results` when given.
    pub fn start(
        workers: usize,
        threads_per_worker: usize,
        capacity: usize,
        results: Option<Arc<ResultPool>>,
        metrics: Arc<Metrics>,
    ) -> Self {
        let shared = Arc::new(Shared {
            queue: Mutex::new(Queue { tasks: VecDeque::new(), shutdown: false }),
            ready: Condvar::new(),
            capacity: capacity.max(1),
            in_flight: Mutex::new(HashMap::new()),
            results,
            metrics,
            threads_per_worker: threads_per_worker.max(1),
            completed: AtomicU64::new(0),
            fault: Mutex::new(None),
        });
        let handles = (0..workers.max(1))
            .map(|n| {
                let shared = Arc::clone(&shared);
                std::thread::Builder::new()
                    .name(format!("render-{n}"))
                    .spawn(move || worker_loop(&shared))
                    .expect("spawn render worker")
            })
            .collect();
        WorkerPool { shared, handles: Mutex::new(handles) }
    }

    pub fn set_fault_hook(&self, hook: Option<FaultHook>) {
        *self.shared.fault.lock().unwrap() = hook;
    }

    /// Joins an identical in-flight task, answers from the result pool, or
    /// enqueues a new task, in that order.
    pub fn submit(&self, key: TaskKey, dataset: Arc<Dataset>) -> Result<Submission, ServiceError> {
        let s = &self.shared;
        let mut in_flight = s.in_flight.lock().unwrap();
        if let Some(waiters) = in_flight.get_mut(&key) {
            let (tx, rx) = oneshot::channel();
            waiters.push(tx);
            Metrics::incr(&s.metrics.deduplicated);
            return Ok(Submission::Pending(rx));
        }
        // Workers publish to the result pool before leaving the in-flight
        // map, so a miss on both means no render of this key is underway.
        if let Some(grid) = s.results.as_ref().and_then(|r| r.get(&key)) {
            Metrics::incr(&s.metrics.cache_hits);
            return Ok(Submission::Cached(grid));
        }
        let mut queue = s.queue.lock().unwrap();
        if queue.shutdown {
            return Err(ServiceError::ShuttingDown);
        }
        if queue.tasks.len() >= s.capacity {
            Metrics::incr(&s.metrics.rejected);
            return Err(ServiceError::QueueFull);
        }
        let (tx, rx) = oneshot::channel();
        in_flight.insert(key.clone(), vec![tx]);
        queue.tasks.push_back(Task { key, dataset, attempt: 0 });
        Metrics::incr(&s.metrics.cache_misses);
        Metrics::incr(&s.metrics.tasks_enqueued);
        drop(queue);
        drop(in_flight);
        s.ready.notify_one();
        Ok(Submission::Pending(rx))
    }

    pub fn queue_depth(&self) -> usize {
        self.shared.queue.lock().unwrap().tasks.len()
    }

    pub fn in_flight(&self) -> usize {
        self.shared.in_flight.lock().unwrap().len()
    }

    /// Stops accepting tasks, lets queued ones finish, and joins the workers.
    pub fn shutdown(&self) {
        self.shared.queue.lock().unwrap().shutdown = true;
        self.shared.ready.notify_all();
        for h in self.handles.lock().unwrap().drain(..) {
            let _ = h.join();
        }
    }
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn worker_loop(s: &Shared) {
    loop {
        let task = {
            let mut q = s.queue.lock().unwrap();
            loop {
                if let Some(t) = q.tasks.pop_front() {
                    break t;
                }
                if q.shutdown {
                    return;
                }
                q = s.ready.wait(q).unwrap();
            }
        };
        run_task(s, task);
    }
}

fn run_task(s: &Shared, task: Task) {
    let hook = s.fault.lock().unwrap().clone();
    let started = Instant::now();
    let attempt = catch_unwind(AssertUnwindSafe(|| {
        if let Some(h) = &hook {
            if h(&task.key, task.attempt) {
                panic!("injected fault in {}", task.key);
            }
        }
        render_classgrid_with_stats(&task.dataset, &task.key.tile, task.key.width, s.threads_per_worker)
    }));
    let result = match attempt {
        Ok(Ok((grid, _stats))) => {
            s.metrics.record_render(started.elapsed());
            Metrics::incr(&s.metrics.tiles_rendered);
            let grid = Arc::new(grid);
            if let Some(r) = &s.results {
                r.insert(task.key.clone(), Arc::clone(&grid));
            }
            let sequence = s.completed.fetch_add(1, Ordering::SeqCst) + 1;
            Ok(RenderOutcome { grid, sequence })
        }
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) if task.attempt == 0 => {
            tracing::warn!(task = %task.key, "render worker panicked; retrying once");
            Metrics::incr(&s.metrics.retries);
            let mut q = s.queue.lock().unwrap();
            q.tasks.push_front(Task { attempt: 1, ..task });
            drop(q);
            s.ready.notify_one();
            return;
        }
        Err(_) => {
            tracing::error!(task = %task.key, "render failed twice");
            Err(format!("render of {} panicked", task.key))
        }
    };
    if result.is_err() {
        Metrics::incr(&s.metrics.failures);
    }
    let waiters = s.in_flight.lock().unwrap().remove(&task.key).unwrap_or_default();
    for w in waiters {
        let _ = w.send(result.clone());
    }
}
