import asyncio
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Awaitable, Callable, List, Sequence, TypeVar

from . import logger

T = TypeVar("T")
R = TypeVar("R")


class JobManager:
    """
    任务管理器 - 同名任务不重入，独立参数点分发到线程池并按参数顺序收集结果
    """

    def __init__(self, workers: int = 4):
        # 存储当前正在运行的任务
        self.running_jobs = set()
        self.workers = max(1, int(workers))

    async def map(self, func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """
        在线程池中执行 func(item)，返回顺序与 items 一致
        """
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = [loop.run_in_executor(executor, func, item) for item in items]
            return list(await asyncio.gather(*futures))

    async def run_job(self, job_id: str, factory: Callable[[], Awaitable[Any]]) -> Any:
        """
        运行指定任务，异常记录后向上抛出

        Args:
            job_id: 任务名
            factory: 返回协程的可调用对象
        """
        if job_id in self.running_jobs:
            logger.warning(f"任务已经在运行中，跳过执行 job_id: {job_id}")
            return None

        started = time.perf_counter()
        try:
            self.running_jobs.add(job_id)
            logger.info(f"开始处理任务: {job_id}")
            result = await factory()
            logger.info(f"任务处理完成 job_id: {job_id}, 用时 {time.perf_counter() - started:.2f}s")
            return result
        except Exception as e:
            logger.error(f"任务处理失败 job_id: {job_id}, 错误信息: {str(e)}")
            raise
        finally:
            self.running_jobs.discard(job_id)
