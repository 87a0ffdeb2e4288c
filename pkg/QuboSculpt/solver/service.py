"""
采样服务 - 以远程协议对外提供本地退火器
Sampler service - exposes the local annealer behind the remote wire protocol.
"""

from __future__ import annotations

import asyncio
import dataclasses
import logging
import math
from typing import Any

from quart import Quart, Response, jsonify, request

from QuboSculpt import __app_name__, __version__
from QuboSculpt.kernel.errors import QuboError
from QuboSculpt.qubo.codec import dumps_samples, loads_qubo
from QuboSculpt.qubo.model import IndexMap
from QuboSculpt.solver.annealer import solve_annealer
from QuboSculpt.solver.base import AnnealerParams

logger = logging.getLogger(__name__)


class SamplerService:
    """
    基于 Quart 的采样服务
    Quart-based sampler service.

    POST /sample?num_reads=N 以 N 次重启运行退火器，返回每行一个样本。
    可选的 block_size=K 与 penalty=λ 恢复 one-hot 分块结构，
    使交换移动与本地求解一致。
    POST /sample?num_reads=N runs the annealer with N restarts and answers one
    sample per line. The optional block_size=K and penalty=λ restore the one-hot
    block layout so block swaps behave as in a local solve.
    """

    def __init__(
        self,
        params: AnnealerParams | None = None,
        seed: int = 0,
        host: str = "127.0.0.1",
        port: int = 8765,
    ) -> None:
        self._params = params or AnnealerParams()
        self._seed = seed
        self._host = host
        self._port = port
        self._app = Quart(__name__)
        self._setup_routes()

    @property
    def app(self) -> Quart:
        return self._app

    def _setup_routes(self) -> None:
        @self._app.route("/health")
        async def health() -> Any:
            return jsonify({"name": __app_name__, "version": __version__})

        @self._app.route("/sample", methods=["POST"])
        async def sample() -> Any:
            try:
                num_reads = int(request.args.get("num_reads", "1"))
                block_size = int(request.args.get("block_size", "1"))
                penalty = float(request.args.get("penalty", "0"))
            except ValueError:
                return Response(
                    "num_reads and block_size must be integers, penalty a number\n",
                    status=400,
                )
            if num_reads < 1:
                return Response("num_reads must be positive\n", status=400)
            if block_size < 1:
                return Response("block_size must be positive\n", status=400)
            if not math.isfinite(penalty) or penalty < 0.0:
                return Response(
                    "penalty must be finite and non-negative\n", status=400
                )

            body = (await request.get_data()).decode("utf-8", errors="replace")
            try:
                instance = loads_qubo(body)
                if instance.size % block_size:
                    raise QuboError(
                        f"block_size {block_size} does not divide NK={instance.size}"
                    )
                instance = dataclasses.replace(
                    instance,
                    index_map=IndexMap(instance.size // block_size, block_size),
                    lam=penalty,
                )
            except QuboError as exc:
                return Response(f"{exc}\n", status=400)

            params = self._params.model_copy(update={"restarts": num_reads})
            result = await asyncio.to_thread(
                solve_annealer, instance, params, self._seed
            )
            logger.info(
                "采样请求完成: NK=%d, K=%d, num_reads=%d, 最优能量 %.6g",
                instance.size,
                block_size,
                num_reads,
                result.best_energy,
            )
            lines = dumps_samples(
                (s.bits, s.energy, s.multiplicity) for s in result.samples
            )
            return Response(lines, status=200, mimetype="text/plain")

    async def run(self) -> None:
        """启动服务器 / Start server."""
        from hypercorn.asyncio import serve
        from hypercorn.config import Config

        config = Config()
        config.bind = [f"{self._host}:{self._port}"]
        config.accesslog = None

        logger.info("采样服务运行在 http://%s:%d/sample", self._host, self._port)
        await serve(self._app, config)
