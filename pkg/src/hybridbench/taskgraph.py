"""Task-parallel machinery: weighted DAGs, critical paths, list scheduling.

Tasks carry a cost on each device; edges carry communication volumes that
are charged (via the platform link) only when the endpoints land on
different devices. Mapping uses upward-rank list scheduling with
earliest-finish placement; optimal assignment is NP-complete, so the
heuristic is validated against a lower bound and, on small instances,
brute-force assignment enumeration.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter
from typing import Any, Callable, Iterable, Mapping

from .errors import StructuralError, TaskExecutionError
from .platform import (
    Device,
    DeviceId,
    Interval,
    Platform,
    Timeline,
    modeled_compute_time,
    modeled_transfer_time,
)

TaskId = str


@dataclass(frozen=True)
class Task:
    id: TaskId
    cost_a: float
    cost_b: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.cost_a < 0 or self.cost_b < 0:
            raise ValueError(f"task {self.id}: costs must be >= 0")

    def cost_on(self, device_id: DeviceId) -> float:
        return self.cost_a if device_id is DeviceId.A else self.cost_b


@dataclass(frozen=True)
class Edge:
    src: TaskId
    dst: TaskId
    nbytes: float = 0.0

    def __post_init__(self) -> None:
        if self.nbytes < 0:
            raise ValueError(f"edge {self.src}->{self.dst}: bytes must be >= 0")


class TaskGraph:
    """A DAG of tasks; acyclicity is checked whenever an order is needed."""

    def __init__(self, tasks: Iterable[Task], edges: Iterable[Edge] = ()):
        self.tasks: dict[TaskId, Task] = {}
        for task in tasks:
            if task.id in self.tasks:
                raise StructuralError(f"duplicate task id {task.id!r}")
            self.tasks[task.id] = task
        self.edges: tuple[Edge, ...] = tuple(edges)
        for edge in self.edges:
            if edge.src not in self.tasks or edge.dst not in self.tasks:
                raise StructuralError(f"edge {edge.src}->{edge.dst} references unknown task")
        self._preds: dict[TaskId, list[Edge]] = {tid: [] for tid in self.tasks}
        self._succs: dict[TaskId, list[Edge]] = {tid: [] for tid in self.tasks}
        for edge in self.edges:
            self._preds[edge.dst].append(edge)
            self._succs[edge.src].append(edge)

    def in_edges(self, tid: TaskId) -> list[Edge]:
        return self._preds[tid]

    def out_edges(self, tid: TaskId) -> list[Edge]:
        return self._succs[tid]

    def predecessors(self, tid: TaskId) -> list[TaskId]:
        return [e.src for e in self._preds[tid]]

    def topological_order(self) -> list[TaskId]:
        """Kahn's algorithm with lexicographic tie-breaking; raises on cycles."""
        indeg = {tid: len(self._preds[tid]) for tid in self.tasks}
        ready = [tid for tid, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order: list[TaskId] = []
        while ready:
            tid = heapq.heappop(ready)
            order.append(tid)
            for edge in self._succs[tid]:
                indeg[edge.dst] -= 1
                if indeg[edge.dst] == 0:
                    heapq.heappush(ready, edge.dst)
        if len(order) != len(self.tasks):
            raise StructuralError("task graph contains a cycle")
        return order

    def to_dot(self) -> str:
        lines = ["digraph tasks {"]
        for tid in sorted(self.tasks):
            task = self.tasks[tid]
            text = task.label or tid
            lines.append(
                f'  "{tid}" [label="{text}\\ncost_a={task.cost_a:g} cost_b={task.cost_b:g}"];'
            )
        for edge in self.edges:
            lines.append(f'  "{edge.src}" -> "{edge.dst}" [label="{edge.nbytes:g} B"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Schedule:
    assignment: dict[TaskId, DeviceId]
    start: dict[TaskId, float]
    finish: dict[TaskId, float]
    makespan: float

    def to_json_dict(self) -> dict:
        return {
            "assignment": {t: d.value for t, d in sorted(self.assignment.items())},
            "start": dict(sorted(self.start.items())),
            "finish": dict(sorted(self.finish.items())),
            "makespan": self.makespan,
        }


def critical_path(
    graph: TaskGraph, platform: Platform, assignment: Mapping[TaskId, DeviceId]
) -> float:
    """Longest path where nodes cost their assigned-device time and edges
    cost a link transfer when they cross devices."""
    dist: dict[TaskId, float] = {}
    longest = 0.0
    for tid in graph.topological_order():
        device = platform.device(assignment[tid])
        node_time = modeled_compute_time(device, graph.tasks[tid].cost_on(assignment[tid]))
        best_in = 0.0
        for edge in graph.in_edges(tid):
            w = 0.0
            if assignment[edge.src] is not assignment[tid]:
                w = modeled_transfer_time(platform.link, edge.nbytes)
            best_in = max(best_in, dist[edge.src] + w)
        dist[tid] = best_in + node_time
        longest = max(longest, dist[tid])
    return longest


def lower_bound(graph: TaskGraph, platform: Platform) -> float:
    """max(best-device critical path ignoring transfers, total best-device
    work over the combined processing rate). Each worker slot runs a task
    at full device throughput, so the combined rate is slot-weighted;
    with single workers it reduces to throughput_a + throughput_b. Both
    relaxations are valid for any feasible schedule."""
    thr_a = platform.device_a.throughput
    thr_b = platform.device_b.throughput
    dist: dict[TaskId, float] = {}
    path_bound = 0.0
    total_min_work = 0.0
    for tid in graph.topological_order():
        task = graph.tasks[tid]
        node_time = min(task.cost_a / thr_a, task.cost_b / thr_b)
        total_min_work += min(task.cost_a, task.cost_b)
        best_in = max((dist[e.src] for e in graph.in_edges(tid)), default=0.0)
        dist[tid] = best_in + node_time
        path_bound = max(path_bound, dist[tid])
    combined_rate = (
        thr_a * platform.device_a.worker_count + thr_b * platform.device_b.worker_count
    )
    work_bound = total_min_work / combined_rate
    return max(path_bound, work_bound)


def upward_ranks(graph: TaskGraph, platform: Platform) -> dict[TaskId, float]:
    """Mean-cost upward ranks: rank(t) = mean exec time + max over
    successors of (transfer time + rank)."""
    thr_a = platform.device_a.throughput
    thr_b = platform.device_b.throughput
    ranks: dict[TaskId, float] = {}
    for tid in reversed(graph.topological_order()):
        task = graph.tasks[tid]
        mean_exec = 0.5 * (task.cost_a / thr_a + task.cost_b / thr_b)
        best = 0.0
        for edge in graph.out_edges(tid):
            comm = modeled_transfer_time(platform.link, edge.nbytes)
            best = max(best, comm + ranks[edge.dst])
        ranks[tid] = mean_exec + best
    return ranks


class _SlotPool:
    """Greedy interval packing onto worker_count parallel slots."""

    def __init__(self, worker_count: int):
        self.avail = [0.0] * worker_count

    def place(self, ready: float) -> tuple[int, float]:
        best_slot = 0
        best_start = max(self.avail[0], ready)
        for i in range(1, len(self.avail)):
            start = max(self.avail[i], ready)
            if start < best_start:
                best_slot, best_start = i, start
        return best_slot, best_start

    def commit(self, slot: int, finish: float) -> None:
        self.avail[slot] = finish


def _priority_order(graph: TaskGraph, platform: Platform) -> list[TaskId]:
    topo = graph.topological_order()
    pos = {tid: i for i, tid in enumerate(topo)}
    ranks = upward_ranks(graph, platform)
    return sorted(graph.tasks, key=lambda t: (-ranks[t], pos[t]))


def _ready_time(
    graph: TaskGraph,
    platform: Platform,
    finish: dict[TaskId, float],
    assignment: Mapping[TaskId, DeviceId],
    tid: TaskId,
    device_id: DeviceId,
) -> float:
    ready = 0.0
    for edge in graph.in_edges(tid):
        arrival = finish[edge.src]
        if assignment[edge.src] is not device_id:
            arrival += modeled_transfer_time(platform.link, edge.nbytes)
        ready = max(ready, arrival)
    return ready


def schedule_with_assignment(
    graph: TaskGraph, platform: Platform, assignment: Mapping[TaskId, DeviceId]
) -> Schedule:
    """Pack tasks in priority order onto their assigned devices."""
    pools = {
        DeviceId.A: _SlotPool(platform.device_a.worker_count),
        DeviceId.B: _SlotPool(platform.device_b.worker_count),
    }
    start: dict[TaskId, float] = {}
    finish: dict[TaskId, float] = {}
    for tid in _priority_order(graph, platform):
        device_id = assignment[tid]
        ready = _ready_time(graph, platform, finish, assignment, tid, device_id)
        slot, t0 = pools[device_id].place(ready)
        duration = modeled_compute_time(
            platform.device(device_id), graph.tasks[tid].cost_on(device_id)
        )
        start[tid] = t0
        finish[tid] = t0 + duration
        pools[device_id].commit(slot, finish[tid])
    makespan = max(finish.values(), default=0.0)
    return Schedule(dict(assignment), start, finish, makespan)


def _mirrored(graph: TaskGraph, platform: Platform) -> tuple[TaskGraph, Platform]:
    tasks = [Task(t.id, t.cost_b, t.cost_a, t.label) for t in graph.tasks.values()]
    swapped = Platform(
        Device(DeviceId.A, platform.device_b.throughput, platform.device_b.worker_count),
        Device(DeviceId.B, platform.device_a.throughput, platform.device_a.worker_count),
        platform.link,
        platform.accounting,
    )
    return TaskGraph(tasks, graph.edges), swapped


def _prefer_swapped(graph: TaskGraph, platform: Platform) -> bool:
    ordered = sorted(graph.tasks)
    key_a = (
        platform.device_a.throughput,
        platform.device_a.worker_count,
        tuple(graph.tasks[t].cost_a for t in ordered),
    )
    key_b = (
        platform.device_b.throughput,
        platform.device_b.worker_count,
        tuple(graph.tasks[t].cost_b for t in ordered),
    )
    return key_b > key_a


def map_tasks(graph: TaskGraph, platform: Platform) -> Schedule:
    """Upward-rank list scheduling with earliest-finish placement, then a
    deterministic single-move refinement pass.

    Greedy EFT is myopic about outgoing communication, so the EFT
    schedule and both single-device schedules seed a hill climb that
    flips one task's device at a time while it improves the makespan.
    The instance is canonically oriented first so that relabeling the two
    devices (swapping throughputs and costs) yields the mirrored schedule
    with an identical makespan.
    """
    graph.topological_order()
    if _prefer_swapped(graph, platform):
        m_graph, m_platform = _mirrored(graph, platform)
        sched = _schedule_best(m_graph, m_platform)
        return Schedule(
            {tid: dev.other() for tid, dev in sched.assignment.items()},
            sched.start,
            sched.finish,
            sched.makespan,
        )
    return _schedule_best(graph, platform)


def _schedule_best(graph: TaskGraph, platform: Platform) -> Schedule:
    seeds = [_schedule_eft(graph, platform)]
    for device_id in (DeviceId.A, DeviceId.B):
        uniform = {tid: device_id for tid in graph.tasks}
        seeds.append(schedule_with_assignment(graph, platform, uniform))
    best = min((_refine_assignment(graph, platform, s) for s in seeds), key=lambda s: s.makespan)
    return best


def _refine_assignment(graph: TaskGraph, platform: Platform, schedule: Schedule) -> Schedule:
    """Deterministic hill climb over device flips while the makespan
    strictly improves: single-task moves, plus joint moves of an edge's
    two endpoints (a heavy edge can lock both endpoints in place, so
    neither single flip helps on its own)."""
    moves: list[tuple[TaskId, ...]] = [(tid,) for tid in sorted(graph.tasks)]
    moves += [(e.src, e.dst) for e in graph.edges if e.src != e.dst]
    best = schedule
    improved = True
    while improved:
        improved = False
        for group in moves:
            flipped = dict(best.assignment)
            for tid in group:
                flipped[tid] = flipped[tid].other()
            candidate = schedule_with_assignment(graph, platform, flipped)
            if candidate.makespan < best.makespan - 1e-12:
                best = candidate
                improved = True
    return best


def _schedule_eft(graph: TaskGraph, platform: Platform) -> Schedule:
    pools = {
        DeviceId.A: _SlotPool(platform.device_a.worker_count),
        DeviceId.B: _SlotPool(platform.device_b.worker_count),
    }
    assignment: dict[TaskId, DeviceId] = {}
    start: dict[TaskId, float] = {}
    finish: dict[TaskId, float] = {}
    for tid in _priority_order(graph, platform):
        best = None
        for device_id in (DeviceId.A, DeviceId.B):
            ready = _ready_time(graph, platform, finish, assignment, tid, device_id)
            slot, t0 = pools[device_id].place(ready)
            duration = modeled_compute_time(
                platform.device(device_id), graph.tasks[tid].cost_on(device_id)
            )
            eft = t0 + duration
            if best is None or eft < best[0]:
                best = (eft, device_id, slot, t0)
        eft, device_id, slot, t0 = best
        assignment[tid] = device_id
        start[tid] = t0
        finish[tid] = eft
        pools[device_id].commit(slot, eft)
    makespan = max(finish.values(), default=0.0)
    return Schedule(assignment, start, finish, makespan)


def validate_schedule(graph: TaskGraph, platform: Platform, schedule: Schedule) -> None:
    """Structural feasibility: precedence with transfers, per-device
    capacity, and the makespan identity. Raises StructuralError."""
    eps = 1e-9
    for tid in graph.tasks:
        device_id = schedule.assignment[tid]
        duration = modeled_compute_time(
            platform.device(device_id), graph.tasks[tid].cost_on(device_id)
        )
        if abs(schedule.finish[tid] - schedule.start[tid] - duration) > eps:
            raise StructuralError(f"task {tid}: finish - start != modeled duration")
        for edge in graph.in_edges(tid):
            arrival = schedule.finish[edge.src]
            if schedule.assignment[edge.src] is not device_id:
                arrival += modeled_transfer_time(platform.link, edge.nbytes)
            if schedule.start[tid] < arrival - eps:
                raise StructuralError(f"task {tid} starts before {edge.src} arrives")
    for device_id in (DeviceId.A, DeviceId.B):
        capacity = platform.device(device_id).worker_count
        events = []
        for tid, dev in schedule.assignment.items():
            if dev is device_id and schedule.finish[tid] > schedule.start[tid]:
                events.append((schedule.start[tid], 1))
                events.append((schedule.finish[tid], -1))
        events.sort(key=lambda e: (e[0], e[1]))
        live = 0
        for _, delta in events:
            live += delta
            if live > capacity:
                raise StructuralError(f"{device_id.value}: concurrency exceeds worker_count")
    expected = max(schedule.finish.values(), default=0.0)
    if abs(schedule.makespan - expected) > eps:
        raise StructuralError("makespan is not the max task finish time")


def schedule_to_timeline(schedule: Schedule) -> Timeline:
    """Busy-span view of a schedule; concurrent same-device tasks coalesce
    into one span so the Timeline invariants hold."""
    sides: dict[DeviceId, list[Interval]] = {DeviceId.A: [], DeviceId.B: []}
    for device_id in (DeviceId.A, DeviceId.B):
        spans: list[list] = []
        tasks = [
            (schedule.start[tid], schedule.finish[tid], tid)
            for tid, dev in schedule.assignment.items()
            if dev is device_id and schedule.finish[tid] > schedule.start[tid]
        ]
        for t0, t1, tid in sorted(tasks):
            if spans and t0 < spans[-1][1]:
                spans[-1][1] = max(spans[-1][1], t1)
                spans[-1][2] += f"+{tid}"
            else:
                spans.append([t0, t1, tid])
        sides[device_id] = [Interval(s, e, label) for s, e, label in spans]
    return Timeline.build(sides[DeviceId.A], sides[DeviceId.B], total_end=schedule.makespan)


def execute_schedule(
    graph: TaskGraph,
    schedule: Schedule,
    bodies: Mapping[TaskId, Callable[[dict[TaskId, Any]], Any]],
    platform: Platform,
) -> tuple[dict[TaskId, Any], Timeline]:
    """Run task bodies respecting precedence and device assignment.

    Each body receives a dict of its predecessors' results. Under modeled
    accounting the returned Timeline is exactly the schedule's predicted
    one; a body failure aborts downstream tasks and raises
    TaskExecutionError naming the failing task.
    """
    order = graph.topological_order()
    missing = [tid for tid in order if tid not in bodies]
    if missing:
        raise ValueError(f"missing bodies for tasks: {missing}")

    futures: dict[TaskId, Any] = {}
    records: dict[TaskId, tuple[float, float]] = {}
    t0 = perf_counter()

    def runner(tid: TaskId):
        deps = {p: futures[p].result() for p in graph.predecessors(tid)}
        begin = perf_counter()
        value = bodies[tid](deps)
        records[tid] = (begin - t0, perf_counter() - t0)
        return value

    pool_a = ThreadPoolExecutor(max_workers=platform.device_a.worker_count)
    pool_b = ThreadPoolExecutor(max_workers=platform.device_b.worker_count)
    try:
        for tid in order:
            pool = pool_a if schedule.assignment[tid] is DeviceId.A else pool_b
            futures[tid] = pool.submit(runner, tid)
        errors: dict[TaskId, BaseException] = {}
        results: dict[TaskId, Any] = {}
        for tid in order:
            try:
                results[tid] = futures[tid].result()
            except BaseException as exc:  # noqa: BLE001 - any body failure aborts
                errors[tid] = exc
    finally:
        pool_a.shutdown(wait=True)
        pool_b.shutdown(wait=True)

    if errors:
        root = next(tid for tid in order if tid in errors)
        skipped = tuple(tid for tid in order if tid in errors and tid != root)
        raise TaskExecutionError(root, errors[root], skipped)

    if platform.modeled:
        timeline = schedule_to_timeline(schedule)
    else:
        sides: dict[DeviceId, list[Interval]] = {DeviceId.A: [], DeviceId.B: []}
        spans: dict[DeviceId, list[list]] = {DeviceId.A: [], DeviceId.B: []}
        for device_id in (DeviceId.A, DeviceId.B):
            tasks = sorted(
                (records[tid][0], records[tid][1], tid)
                for tid, dev in schedule.assignment.items()
                if dev is device_id
            )
            for s, e, tid in tasks:
                dev_spans = spans[device_id]
                if dev_spans and s < dev_spans[-1][1]:
                    dev_spans[-1][1] = max(dev_spans[-1][1], e)
                    dev_spans[-1][2] += f"+{tid}"
                else:
                    dev_spans.append([s, e, tid])
            sides[device_id] = [Interval(s, e, lbl) for s, e, lbl in spans[device_id]]
        timeline = Timeline.build(sides[DeviceId.A], sides[DeviceId.B])
    return results, timeline
