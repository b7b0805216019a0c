#!/usr/bin/env python3
"""
Performance Monitor for the Slow-Light Simulator
Wall time and resident memory of each stage of a simulation run
"""

import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import psutil

logger = logging.getLogger("slowlight.performance")


@dataclass
class StageMetrics:
    """Resource usage of one run stage"""
    name: str
    started: float
    duration: float
    memory_mb: float
    memory_delta_mb: float
    cpu_percent: float


class RunMonitor:
    """Stage timing and memory monitor"""

    def __init__(self, enabled: bool = True):
        """
        Initialize run monitor

        Args:
            enabled: Record stages; when False every stage is a no-op
        """
        self.enabled = enabled
        self.stages: List[StageMetrics] = []
        self.process = psutil.Process(os.getpid())

    def _memory_mb(self) -> float:
        return self.process.memory_info().rss / 1024 / 1024

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time a block of work and record its memory footprint"""
        if not self.enabled:
            yield
            return

        memory_before = self._memory_mb()
        self.process.cpu_percent()
        started = time.time()
        begin = time.perf_counter()
        try:
            yield
        finally:
            duration = time.perf_counter() - begin
            memory_after = self._memory_mb()
            metrics = StageMetrics(
                name=name,
                started=started,
                duration=duration,
                memory_mb=memory_after,
                memory_delta_mb=memory_after - memory_before,
                cpu_percent=self.process.cpu_percent(),
            )
            self.stages.append(metrics)
            logger.debug(f"📊 {name}: {duration:.3f}s | Memory: {memory_after:.1f}MB "
                         f"({metrics.memory_delta_mb:+.1f}MB)")

    def get_performance_report(self) -> Dict:
        """Summary of all recorded stages"""
        return {
            'system_info': {
                'cpu_count': psutil.cpu_count(),
                'memory_total_mb': psutil.virtual_memory().total / 1024 / 1024,
                'platform': os.name,
            },
            'total_duration': sum(s.duration for s in self.stages),
            'peak_memory_mb': max((s.memory_mb for s in self.stages), default=0.0),
            'stages': [asdict(s) for s in self.stages],
            'timestamp': time.time(),
        }

    def log_summary(self):
        if not self.stages:
            return
        report = self.get_performance_report()
        logger.info(f"⏱️ {len(self.stages)} stages in {report['total_duration']:.3f}s, "
                    f"peak memory {report['peak_memory_mb']:.1f}MB")

    def export_metrics(self, filepath: str) -> Optional[Path]:
        """Export the stage report to a JSON file"""
        if not self.enabled:
            return None
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.get_performance_report(), f, indent=2)
        logger.info(f"📁 Metrics exported to {path}")
        return path
