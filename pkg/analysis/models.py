import hashlib

from django.db import models
from django.utils.translation import gettext_lazy as _


class RunStatusOptions:
    SUCCEEDED = 'succeeded'
    FAILED = 'failed'

    @classmethod
    def getChoices(cls):
        return [
            (cls.SUCCEEDED, _('Succeeded')),
            (cls.FAILED, _('Failed')),
        ]


class ExperimentRun(models.Model):
    command = models.CharField(max_length=100)
    arguments = models.JSONField(default=dict)
    seed = models.IntegerField()
    rel_tol = models.FloatField()
    max_level = models.PositiveSmallIntegerField()
    row_count = models.PositiveIntegerField(default=0)
    output_sha256 = models.CharField(max_length=64, blank=True)
    status = models.CharField(
        max_length=20,
        choices=RunStatusOptions.getChoices(),
        default=RunStatusOptions.SUCCEEDED
    )
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f'{self.command} ({self.status})'

    @staticmethod
    def digest(output: str) -> str:
        return hashlib.sha256(output.encode('utf-8')).hexdigest()
