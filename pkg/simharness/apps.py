from django.apps import AppConfig


class SimharnessConfig(AppConfig):
    name = 'simharness'
    verbose_name = 'Monte-Carlo simulation harness'
