"""Live teaching sessions over HTTP: a human plays the learner.

The engine steps exactly like the offline episode loop, but the response bit
comes from the client and the true inner state does not exist; manipulation
and the future-cost term are reported as posterior-weighted estimates. Every
per-step rollout draws from a generator derived from (session seed, step),
so replaying the recorded responses offline reproduces every suggestion and
belief bit for bit.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .belief import Belief, belief_init, belief_update, posterior_enlightened_prob, posterior_mean_weights
from .config import RunConfig
from .datagen import Dataset, feature_map, generate_dataset, selection_cost
from .experiments import _AUX_SEED
from .learner import TUTOR, enlightened_state, manipulation_level, naive_state, unassisted_learn
from .planner import TeacherConfig, rollout_action

SCHEMA_VERSION = 1

TUTOR_EXPLANATION = (
    "Some of the columns in this dataset move almost in lockstep: they carry "
    "nearly the same information. Including several of them makes the model's "
    "coefficients unstable and hard to interpret, even though each column on "
    "its own looks predictive. A good linear model keeps all of the "
    "independent columns but only one representative from a tightly "
    "correlated group. The heatmap shows the absolute correlation between "
    "the most correlated columns."
)


@dataclass
class SessionEngine:
    """Deterministic session core, shared by the service and offline replay."""

    run_cfg: RunConfig
    session_seed: int
    horizon: int | None = None
    ds: Dataset = field(init=False)
    tcfg: TeacherConfig = field(init=False)
    belief: Belief = field(init=False)
    model: np.ndarray = field(init=False)
    suggested: np.ndarray = field(init=False)
    t: int = 0
    cum_cost: float = 0.0
    history: list[dict] = field(default_factory=list)
    pending: dict | None = None
    finished: bool = False

    def __post_init__(self):
        spec = replace(self.run_cfg.dataset, seed=self.session_seed)
        self.ds = generate_dataset(spec)
        aux = ()
        if self.run_cfg.teacher.u2 > 0:
            aux = tuple(
                generate_dataset(replace(spec, seed=self.session_seed + _AUX_SEED + i))
                for i in range(self.run_cfg.n_aux)
            )
        self.tcfg = self.run_cfg.teacher.build(aux_datasets=aux)
        if self.horizon is not None:
            self.tcfg = replace(self.tcfg, horizon=self.horizon)
        self.horizon = self.tcfg.horizon
        self.belief = belief_init(self.tcfg.grid, self.tcfg.eta)
        self.model = np.zeros(self.ds.d, dtype=np.int8)
        self.suggested = np.zeros(self.ds.d, dtype=bool)
        self._compute_suggestion()

    def _step_rng(self) -> np.random.Generator:
        return np.random.default_rng([self.session_seed, self.t])

    def _compute_suggestion(self) -> None:
        if self.t >= self.horizon:
            self.pending = None
            self.finished = True
            return
        action = rollout_action(
            self.belief, self.model, self.t, self.ds, self.tcfg, self._step_rng(), self.suggested
        )
        if action == TUTOR:
            block = self._heatmap()
            self.pending = {
                "step": self.t + 1,
                "kind": "tutor",
                "explanation": TUTOR_EXPLANATION,
                "heatmap": block,
            }
        else:
            i = int(action)
            phi = feature_map(i, self.model, self.ds)
            self.pending = {
                "step": self.t + 1,
                "kind": "suggest",
                "index": i,
                "name": f"x{i + 1}",
                "phi1": phi[0],
                "phi2": phi[1],
                "corr_to_output": float(self.ds.corr_to_output[i]),
            }

    def _heatmap(self) -> dict:
        # the most mutually correlated columns, shown to the learner as part
        # of the tutoring explanation
        idx = list(self.ds.collinear_idx) or list(range(self.ds.d))
        sub = np.abs(self.ds.corr_matrix[np.ix_(idx, idx)])
        return {
            "names": [f"x{i + 1}" for i in idx],
            "abs_corr": [[round(float(v), 4) for v in row] for row in sub],
        }

    def apply_response(self, response: int) -> None:
        if self.finished or self.pending is None:
            raise ValueError("no suggestion outstanding")
        action: object = TUTOR if self.pending["kind"] == "tutor" else self.pending["index"]
        phi = None
        if action != TUTOR:
            i = int(action)
            phi = feature_map(i, self.model, self.ds)
            self.model = self.model.copy()
            self.model[i] = response
            self.suggested[i] = True
        self.belief = belief_update(self.belief, action, response, phi)
        self.cum_cost += self.tcfg.stage_cost(action)
        self.t += 1
        self.history.append(
            {
                "t": self.t,
                "action": "tutor" if action == TUTOR else str(int(action) + 1),
                "response": int(response),
                "posterior_enlightened": posterior_enlightened_prob(self.belief),
                "cum_cost": self.cum_cost,
            }
        )
        self._compute_suggestion()

    def state_view(self) -> dict:
        pw = posterior_mean_weights(self.belief)
        return {
            "schema_version": SCHEMA_VERSION,
            "status": "finished" if self.finished else "active",
            "step": self.t,
            "horizon": self.horizon,
            "model": [int(v) for v in self.model],
            "alpha": posterior_enlightened_prob(self.belief),
            "mean_w1": pw.w1,
            "mean_w2": pw.w2,
            "w2_from_prior": pw.w2_from_prior,
            "cum_cost": self.cum_cost,
            "pending": self.pending,
            "history": list(self.history),
            "belief": self.belief.to_dict(),
            "variables": [
                {"name": f"x{i + 1}", "corr_to_output": float(self.ds.corr_to_output[i])}
                for i in range(self.ds.d)
            ],
        }

    def terminal_report(self) -> dict:
        """Scalarized cost components under the posterior (estimates, not truth)."""
        alpha = posterior_enlightened_prob(self.belief)
        pw = posterior_mean_weights(self.belief)
        w0 = self.tcfg.grid.w0
        nav = naive_state(w1=pw.w1, w0=w0)
        enl = enlightened_state(w1=pw.w1, w2=pw.w2, w0=w0)
        current = selection_cost(self.model, self.ds)
        future = 0.0
        if self.tcfg.u2 > 0:
            fut_n = sum(selection_cost(unassisted_learn(nav, d), d) for d in self.tcfg.aux_datasets)
            fut_e = sum(selection_cost(unassisted_learn(enl, d), d) for d in self.tcfg.aux_datasets)
            future = (1 - alpha) * fut_n + alpha * fut_e
        manip = (1 - alpha) * manipulation_level(nav, self.ds, self.model) + alpha * manipulation_level(
            enl, self.ds, self.model
        )
        return {
            "schema_version": SCHEMA_VERSION,
            "is_estimate": True,
            "alpha": alpha,
            "stage_cost_total": self.cum_cost,
            "terminal_current": current,
            "terminal_future_estimate": future,
            "terminal_cost_estimate": self.tcfg.u1 * current + self.tcfg.u2 * future,
            "total_cost_estimate": self.cum_cost + self.tcfg.u1 * current + self.tcfg.u2 * future,
            "manipulation_estimate": manip,
        }

    def episode_csv(self) -> str:
        rows = ["t,action,response,posterior_enlightened,true_state,cum_cost"]
        for h in self.history:
            rows.append(
                f"{h['t']},{h['action']},{h['response']},"
                f"{h['posterior_enlightened']:.17g},unknown,{h['cum_cost']:.17g}"
            )
        return "\n".join(rows) + "\n"


def replay_session(run_cfg: RunConfig, session_seed: int, responses: list[int],
                   horizon: int | None = None) -> SessionEngine:
    """Re-run a recorded session offline through the same engine."""
    engine = SessionEngine(run_cfg=run_cfg, session_seed=session_seed, horizon=horizon)
    for b in responses:
        engine.apply_response(int(b))
    return engine


@dataclass
class _Session:
    id: str
    engine: SessionEngine
    lock: threading.Lock = field(default_factory=threading.Lock)
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    ended: bool = False


class CreateSessionBody(BaseModel):
    seed: int | None = None
    horizon: int | None = None


class ResponseBody(BaseModel):
    response: int
    step: int


def create_app(run_cfg: RunConfig | None = None, log_dir: str | Path | None = None) -> FastAPI:
    run_cfg = run_cfg or RunConfig()
    log_dir = Path(log_dir) if log_dir else None
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        # graceful shutdown: persist every session, finished or not
        with registry_lock:
            pending = list(sessions.values())
        for sess in pending:
            with sess.lock:
                _persist(sess)

    app = FastAPI(title="teachlab session service", version="1", lifespan=lifespan)

    def _get(session_id: str) -> _Session:
        with registry_lock:
            sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return sess

    def _persist(sess: _Session) -> None:
        if log_dir is None:
            return
        log_dir.mkdir(parents=True, exist_ok=True)
        (log_dir / f"session_{sess.id}.csv").write_text(sess.engine.episode_csv())
        meta = {
            "session_id": sess.id,
            "seed": sess.engine.session_seed,
            "horizon": sess.engine.horizon,
            "responses": [h["response"] for h in sess.engine.history],
            "created": sess.created,
            "updated": sess.updated,
        }
        (log_dir / f"session_{sess.id}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "schema_version": SCHEMA_VERSION}

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        seed = body.seed if body.seed is not None else int(np.random.default_rng().integers(2**63))
        if body.horizon is not None and body.horizon < 1:
            raise HTTPException(status_code=422, detail="horizon must be >= 1")
        try:
            engine = SessionEngine(run_cfg=run_cfg, session_seed=seed, horizon=body.horizon)
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        sess = _Session(id=uuid.uuid4().hex, engine=engine)
        with registry_lock:
            sessions[sess.id] = sess
        return {"session_id": sess.id, "seed": seed, "state": engine.state_view()}

    @app.get("/api/v1/sessions/{session_id}")
    def get_state(session_id: str):
        sess = _get(session_id)
        with sess.lock:
            return {"session_id": sess.id, "state": sess.engine.state_view()}

    @app.post("/api/v1/sessions/{session_id}/response")
    def post_response(session_id: str, body: ResponseBody):
        if body.response not in (0, 1):
            raise HTTPException(status_code=422, detail="response must be 0 or 1")
        sess = _get(session_id)
        with sess.lock:
            eng = sess.engine
            if eng.finished or eng.pending is None:
                raise HTTPException(status_code=409, detail="session finished")
            if body.step != eng.pending["step"]:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale response: outstanding step is {eng.pending['step']}",
                )
            eng.apply_response(body.response)
            sess.updated = time.time()
            out = {"session_id": sess.id, "state": eng.state_view()}
            if eng.finished:
                out["terminal"] = eng.terminal_report()
                _persist(sess)
            return out

    @app.post("/api/v1/sessions/{session_id}/end")
    def end_session(session_id: str):
        sess = _get(session_id)
        with sess.lock:
            sess.engine.finished = True
            sess.engine.pending = None
            if not sess.ended:
                sess.ended = True
                sess.updated = time.time()
                _persist(sess)
            return {
                "session_id": sess.id,
                "terminal": sess.engine.terminal_report(),
                "csv": sess.engine.episode_csv(),
            }

    @app.get("/api/v1/sessions/{session_id}/episode.csv", response_class=PlainTextResponse)
    def episode_csv(session_id: str):
        sess = _get(session_id)
        with sess.lock:
            return sess.engine.episode_csv()

    static_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
