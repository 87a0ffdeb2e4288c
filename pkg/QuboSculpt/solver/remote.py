"""
远程采样器客户端 - 通过 HTTP 提交文本序列化的 QUBO
Remote sampler client - submits the text-serialized QUBO over HTTP.

协议：POST {endpoint}?num_reads=N&block_size=K&penalty=λ，请求体为 QUBO 文本，
响应每行 "energy multiplicity bitstring"。block_size 与 penalty 让服务端
按 one-hot 分块进行交换移动。
Protocol: POST {endpoint}?num_reads=N&block_size=K&penalty=λ with the QUBO text
as body; the response holds one "energy multiplicity bitstring" line per sample.
block_size and penalty let the service anneal with one-hot block swaps.
"""

from __future__ import annotations

import asyncio
import logging
import os
import time

import aiohttp
from tenacity import (
    AsyncRetrying,
    RetryError,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from QuboSculpt.kernel.errors import QuboError, RemoteSolverError, SolverConfigError
from QuboSculpt.qubo.codec import dumps_qubo, loads_samples
from QuboSculpt.solver.base import (
    QuboSolver,
    RemoteSettings,
    Sample,
    SolveRequest,
    SolveResult,
    SolverBackend,
    build_result,
)

logger = logging.getLogger(__name__)

ENDPOINT_ENV = "QUBOSCULPT_SOLVER_ENDPOINT"

_TRANSIENT = (aiohttp.ClientConnectionError, asyncio.TimeoutError)


def resolve_endpoint(settings: RemoteSettings) -> str:
    """
    环境变量优先，其次为配置；都未设置时报错
    The environment variable wins over the configured endpoint; neither set is an error.
    """
    endpoint = os.environ.get(ENDPOINT_ENV) or settings.endpoint
    if not endpoint:
        raise SolverConfigError(
            f"remote backend selected but no endpoint configured (set {ENDPOINT_ENV})"
        )
    return endpoint


def request_params(
    num_reads: int, block_size: int = 1, penalty: float = 0.0
) -> dict[str, str]:
    """请求查询参数 / Query parameters of a sample request."""
    return {
        "num_reads": str(num_reads),
        "block_size": str(block_size),
        "penalty": repr(float(penalty)),
    }


async def _post_once(
    session: aiohttp.ClientSession, endpoint: str, body: str, params: dict[str, str]
) -> str:
    async with session.post(
        endpoint,
        params=params,
        data=body.encode("utf-8"),
        headers={"Content-Type": "text/plain; charset=utf-8"},
    ) as resp:
        text = await resp.text()
        if resp.status != 200:
            raise RemoteSolverError(
                f"remote sampler answered HTTP {resp.status}: {text.strip()[:200]}"
            )
        return text


async def fetch_samples(
    settings: RemoteSettings,
    body: str,
    num_reads: int,
    size: int,
    block_size: int = 1,
    penalty: float = 0.0,
) -> list[Sample]:
    """
    提交请求并解析样本；连接失败与超时按配置次数重试
    Submit and parse samples; connection failures and timeouts are retried up to
    the configured attempt count.

    其余客户端错误（非法 URL、无法解码的响应等）直接转为 RemoteSolverError。
    Any other client error (invalid URL, undecodable response, ...) becomes a
    RemoteSolverError without retrying.
    """
    params = request_params(num_reads, block_size, penalty)
    endpoint = resolve_endpoint(settings)
    timeout = aiohttp.ClientTimeout(total=settings.timeout)
    try:
        async with aiohttp.ClientSession(timeout=timeout) as session:
            async for attempt in AsyncRetrying(
                stop=stop_after_attempt(settings.attempts),
                wait=wait_exponential(multiplier=0.2, max=2.0),
                retry=retry_if_exception_type(_TRANSIENT),
                reraise=True,
            ):
                with attempt:
                    text = await _post_once(session, endpoint, body, params)
    except (RetryError, *_TRANSIENT) as exc:
        raise RemoteSolverError(
            f"remote sampler at {endpoint} unreachable after "
            f"{settings.attempts} attempt(s): {exc!r}"
        ) from exc
    except (aiohttp.ClientError, UnicodeDecodeError) as exc:
        raise RemoteSolverError(
            f"remote sampler request to {endpoint!r} failed: {exc!r}"
        ) from exc

    try:
        parsed = loads_samples(text, size)
    except QuboError as exc:
        raise RemoteSolverError(f"malformed remote response: {exc}") from exc
    if not parsed:
        raise RemoteSolverError("remote sampler returned no samples")
    return [Sample(bits, energy, mult) for bits, energy, mult in parsed]


class RemoteSolver(QuboSolver):
    """远程采样后端 / Remote sampler backend."""

    backend = SolverBackend.REMOTE

    async def solve(self, request: SolveRequest) -> SolveResult:
        # 网络请求之前先确认端点
        resolve_endpoint(request.remote)
        start = time.perf_counter()
        body = dumps_qubo(request.instance)
        samples = await fetch_samples(
            request.remote,
            body,
            request.num_reads,
            request.instance.size,
            block_size=request.instance.k,
            penalty=request.instance.lam,
        )
        logger.info("远程采样器返回 %d 个样本", len(samples))
        return build_result(samples, self.backend, time.perf_counter() - start)
