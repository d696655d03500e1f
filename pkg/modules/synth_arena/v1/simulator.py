"""
Round simulator: two 5-agent teams on the area graph.

Agents walk or run between random waypoints, keeping their icons apart. At
every whole second the round state advances: footsteps of the past second
are labelled, the spike clock and defuse progress move, duels are resolved
in shared areas, skills are cast and the spike may be planted. A round ends
on elimination, detonation or defuse, or at the time cap.
"""
import hashlib
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.minimap import (
    EventKind,
    EventLabel,
    MapSpec,
    Outcome,
    ROSTER,
    Team,
    footstep_events,
    get_map,
    sort_events
)
from core.minimap.glyphs import ATTACKER_AGENTS, DEFENDER_AGENTS
from core.tensor import make_rng
from .models import DuelRecord, EffectSpan, GroundTruth, SimConfig, SpikeState
from .render import icon_fits

logger = logging.getLogger(__name__)

SITES = ("site_a", "site_b")
SPAWNS = {Team.ATTACKER: "atk_spawn", Team.DEFENDER: "def_spawn"}
AREA_MARGIN = 5
PLACEMENT_TRIES = 50


class Agent:
    """Mutable per-round agent state"""

    def __init__(self, name: str, x: float, y: float):
        self.name = name
        self.team = ROSTER[name]
        self.x = x
        self.y = y
        self.alive = True
        self.target: Tuple[float, float] = (x, y)
        self.speed = 0.0
        self.stuck = 0
        self.next_skill_s = 0

    @property
    def pixel(self) -> Tuple[int, int]:
        return int(round(self.x)), int(round(self.y))


class RoundSimulator:
    """Simulates one round; use simulate_round()"""

    def __init__(self, cfg: SimConfig, seed: int, map_spec: Optional[MapSpec] = None):
        self.cfg = cfg
        self.seed = seed
        self.map = map_spec or get_map(cfg.map_id)
        self.rng = make_rng(seed, "round")
        self.fps = cfg.fps
        self.agents: Dict[str, Agent] = {}
        self.tracks: Dict[str, List[Optional[Tuple[int, int]]]] = {}
        self.effects: List[EffectSpan] = []
        self.spike: Optional[SpikeState] = None
        self.defuse_progress = 0
        self.events: List[EventLabel] = []
        self.footsteps: List[EventLabel] = []
        self.duels: List[DuelRecord] = []
        self.attack_site = SITES[int(self.rng.integers(len(SITES)))]
        self._hops = self._area_distances(self.attack_site)

    # ---------------------------------------------------------------- geometry

    def _area_distances(self, goal: str) -> Dict[str, int]:
        """Hop count from every area to `goal` over the area graph"""
        distances = {goal: 0}
        frontier = [goal]
        while frontier:
            nxt = []
            for name in frontier:
                for neighbour in self.map.neighbours(name):
                    if neighbour not in distances:
                        distances[neighbour] = distances[name] + 1
                        nxt.append(neighbour)
            frontier = nxt
        return distances

    def _random_point(self, area_name: str) -> Tuple[float, float]:
        area = self.map.area(area_name)
        x = self.rng.uniform(area.x0 + AREA_MARGIN, area.x1 - 1 - AREA_MARGIN)
        y = self.rng.uniform(max(area.y0, self.map.playfield_y0) + AREA_MARGIN, area.y1 - 1 - AREA_MARGIN)
        return float(x), float(y)

    def _icon_spots(self, frame: int, exclude: Optional[str] = None) -> List[Tuple[int, int]]:
        spots = [a.pixel for a in self.agents.values() if a.alive and a.name != exclude]
        spots += [(e.x, e.y) for e in self.effects if e.active(frame)]
        if self.spike is not None:
            spots.append((self.spike.x, self.spike.y))
        return spots

    def _free(self, x: int, y: int, spots: List[Tuple[int, int]]) -> bool:
        if not icon_fits(self.map, x, y):
            return False
        sep = self.cfg.min_separation
        return all(max(abs(x - sx), abs(y - sy)) >= sep for sx, sy in spots)

    def _area_of(self, agent: Agent) -> str:
        return self.map.locate(*agent.pixel).name

    # ---------------------------------------------------------------- setup

    def _spawn(self) -> None:
        for name in ATTACKER_AGENTS + DEFENDER_AGENTS:
            spawn = SPAWNS[ROSTER[name]]
            spots = [a.pixel for a in self.agents.values()]
            for _ in range(PLACEMENT_TRIES * 4):
                x, y = self._random_point(spawn)
                if self._free(int(round(x)), int(round(y)), spots):
                    break
            else:
                raise RuntimeError(f"no free spawn spot for {name}")
            agent = Agent(name, float(round(x)), float(round(y)))
            self.agents[name] = agent
            self.tracks[name] = []
            self._new_waypoint(agent)

    # ---------------------------------------------------------------- movement

    def _goal_area(self, agent: Agent) -> Optional[str]:
        if agent.team is Team.ATTACKER:
            return self.attack_site
        if self.spike is not None:
            return self.spike.area
        return None

    def _new_waypoint(self, agent: Agent) -> None:
        here = self._area_of(agent)
        options = [here] + self.map.neighbours(here)
        goal = self._goal_area(agent)
        if goal is not None and self.rng.random() < 0.6:
            hops = self._hops if goal == self.attack_site else self._area_distances(goal)
            closer = [a for a in options if hops.get(a, 99) < hops.get(here, 99)]
            options = closer or [here]
        elif agent.team is Team.DEFENDER and self.spike is None:
            options = [a for a in options if a != SPAWNS[Team.ATTACKER]] or [here]
        area = options[int(self.rng.integers(len(options)))]
        agent.target = self._random_point(area)
        agent.speed = self.cfg.walk_speed if self.rng.random() < self.cfg.walk_prob else self.cfg.run_speed
        agent.stuck = 0

    def _move(self, agent: Agent, frame: int) -> None:
        tx, ty = agent.target
        dx, dy = tx - agent.x, ty - agent.y
        dist = math.hypot(dx, dy)
        if dist <= 1e-9:
            self._new_waypoint(agent)
            return
        step = min(agent.speed, dist)
        nx, ny = agent.x + dx / dist * step, agent.y + dy / dist * step
        if self._free(int(round(nx)), int(round(ny)), self._icon_spots(frame, exclude=agent.name)):
            agent.x, agent.y = nx, ny
            agent.stuck = 0
            if step >= dist:
                self._new_waypoint(agent)
        else:
            agent.stuck += 1
            if agent.stuck >= self.cfg.stuck_reset_s * self.fps:
                self._new_waypoint(agent)

    # ---------------------------------------------------------------- second ticks

    def _alive(self, team: Team) -> List[Agent]:
        return [a for a in self.agents.values() if a.alive and a.team is team]

    def _informed(self, team: Team, second: int) -> bool:
        """An opponent was heard within the info window"""
        lo = second - self.cfg.info_window_s
        return any(e.team is team.opponent and lo <= e.timestamp < second for e in self.footsteps)

    def _skill_active(self, team: Team, area: str, frame: int) -> bool:
        return any(
            ROSTER[e.agent] is team and e.active(frame) and self.map.locate(e.x, e.y).name == area
            for e in self.effects
        )

    def _duels(self, second: int, frame: int) -> None:
        cfg = self.cfg
        by_area: Dict[str, Dict[Team, List[Agent]]] = {}
        for agent in self.agents.values():
            if agent.alive:
                by_area.setdefault(self._area_of(agent), {Team.ATTACKER: [], Team.DEFENDER: []})[agent.team].append(agent)
        for area in sorted(by_area):
            attackers, defenders = by_area[area][Team.ATTACKER], by_area[area][Team.DEFENDER]
            if not attackers or not defenders or self.rng.random() >= cfg.engage_prob:
                continue
            attacker = attackers[int(self.rng.integers(len(attackers)))]
            defender = defenders[int(self.rng.integers(len(defenders)))]
            p = (cfg.p0
                 + cfg.numbers_bonus * float(np.sign(len(attackers) - len(defenders)))
                 + cfg.skill_bonus * (int(self._skill_active(Team.ATTACKER, area, frame))
                                      - int(self._skill_active(Team.DEFENDER, area, frame)))
                 + cfg.info_bonus * (int(self._informed(Team.ATTACKER, second))
                                     - int(self._informed(Team.DEFENDER, second))))
            p = min(1.0, max(0.0, p))
            attacker_wins = bool(self.rng.random() < p)
            (defender if attacker_wins else attacker).alive = False
            self.duels.append(DuelRecord(
                second=second,
                area=area,
                attacker=attacker.name,
                defender=defender.name,
                winner=Team.ATTACKER if attacker_wins else Team.DEFENDER,
                p_attacker=p
            ))

    def _cast_skills(self, second: int, frame: int) -> None:
        cfg = self.cfg
        for name in sorted(self.agents):
            agent = self.agents[name]
            if not agent.alive or second < agent.next_skill_s:
                continue
            enemies = self._alive(agent.team.opponent)
            near = any(math.hypot(agent.x - e.x, agent.y - e.y) <= cfg.skill_range for e in enemies)
            if not near or self.rng.random() >= cfg.skill_prob:
                continue
            ax, ay = agent.pixel
            spots = self._icon_spots(frame)
            for _ in range(PLACEMENT_TRIES):
                ex = ax + int(self.rng.integers(-20, 21))
                ey = ay + int(self.rng.integers(-20, 21))
                if self._free(ex, ey, spots):
                    break
            else:
                continue
            self.effects.append(EffectSpan(
                agent=name, x=ex, y=ey, start_frame=frame, end_frame=frame + cfg.skill_duration_s * self.fps
            ))
            agent.next_skill_s = second + cfg.skill_cooldown_s
            self.events.append(EventLabel(
                timestamp=frame / self.fps,
                team=agent.team,
                agent=name,
                area=self.map.locate(ex, ey).name,
                kind=EventKind.SKILL_USE
            ))

    def _try_plant(self, second: int, frame: int) -> None:
        cfg = self.cfg
        if self.spike is not None or second > cfg.cap_s - cfg.spike_timer_s:
            return
        site = self.map.area(self.attack_site)
        sx, sy = (site.x0 + site.x1) // 2, (site.y0 + site.y1) // 2
        attackers = sorted(self._alive(Team.ATTACKER), key=lambda a: math.hypot(a.pixel[0] - sx, a.pixel[1] - sy))
        if not attackers:
            return
        planter = attackers[0]
        px, py = planter.pixel
        d0 = math.hypot(px - sx, py - sy)
        if len(attackers) > 1:
            ox, oy = attackers[1].pixel
            if math.hypot(ox - sx, oy - sy) <= d0 + 1.0:
                return
        if max(abs(px - sx), abs(py - sy)) > cfg.plant_reach:
            return
        if not self._free(sx, sy, self._icon_spots(frame)) or self.rng.random() >= cfg.plant_prob:
            return
        self.spike = SpikeState(x=sx, y=sy, area=site.name, planter=planter.name, plant_frame=frame)
        self.events.append(EventLabel(
            timestamp=frame / self.fps, team=Team.ATTACKER, agent=planter.name,
            area=site.name, kind=EventKind.SPIKE_PLANT
        ))

    def _tick(self, second: int, frame: int) -> Optional[Tuple[Outcome, str]]:
        """Advance the round state; returns (outcome, reason) when the round ends at `frame`"""
        cfg = self.cfg
        self.footsteps += footstep_events(
            self.tracks, self.map, self.fps, self.map.audible_radius, cfg.v_min, cfg.speed_window,
            start_frame=frame - self.fps, end_frame=frame
        )

        if self.spike is not None:
            planted_s = self.spike.plant_frame // self.fps
            defenders_on_site = any(self._area_of(a) == self.spike.area for a in self._alive(Team.DEFENDER))
            self.defuse_progress = self.defuse_progress + 1 if defenders_on_site else 0
            if self.defuse_progress >= cfg.defuse_s:
                return Outcome.DEFENDER_WIN, "defuse"
            if second >= planted_s + cfg.spike_timer_s:
                return Outcome.ATTACKER_WIN, "detonation"

        self._duels(second, frame)
        if not self._alive(Team.DEFENDER):
            return Outcome.ATTACKER_WIN, "elimination"
        if not self._alive(Team.ATTACKER) and self.spike is None:
            return Outcome.DEFENDER_WIN, "elimination"
        if second >= cfg.cap_s and self.spike is None:
            return Outcome.DEFENDER_WIN, "time"

        self._cast_skills(second, frame)
        self._try_plant(second, frame)
        return None

    # ---------------------------------------------------------------- main loop

    def run(self) -> GroundTruth:
        self._spawn()
        frame = 0
        while True:
            if frame > 0:
                for name in sorted(self.agents):
                    if self.agents[name].alive:
                        self._move(self.agents[name], frame)
            if frame > 0 and frame % self.fps == 0:
                ended = self._tick(frame // self.fps, frame)
                if ended is not None:
                    outcome, reason = ended
                    break
            for name, agent in self.agents.items():
                self.tracks[name].append(agent.pixel if agent.alive else None)
            frame += 1

        events = sort_events(self.footsteps + self.events)
        logger.debug(f"Round seed={self.seed}: {outcome.value} by {reason} after {frame} frames, {len(events)} events")
        return GroundTruth(
            seed=self.seed,
            map_id=self.map.map_id,
            fps=self.fps,
            outcome=outcome,
            end_reason=reason,
            n_frames=frame,
            lead_in_frames=self.cfg.lead_in_frames,
            tail_frames=self.cfg.tail_frames,
            tracks=self.tracks,
            effects=[e.model_copy(update={"end_frame": min(e.end_frame, frame)}) for e in self.effects],
            spike=self.spike,
            events=events,
            duels=self.duels
        )


def simulate_round(cfg: SimConfig, seed: int, map_spec: Optional[MapSpec] = None) -> GroundTruth:
    """
    Simulate one round.

    Args:
        cfg: Simulator settings
        seed: Round seed; (cfg, seed) fully determines the result
        map_spec: Map override (cfg.map_id from the registry when None)

    Returns:
        GroundTruth with per-frame tracks, events, duel log and outcome
    """
    return RoundSimulator(cfg, seed, map_spec).run()


def derive_seed(base_seed: int, index: int) -> int:
    """Per-round seed; independent of thread scheduling and of the other rounds"""
    digest = hashlib.sha256(f"{base_seed}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
