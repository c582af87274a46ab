from django.apps import AppConfig


class QhgridConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'qhgrid'
    verbose_name = 'Quasihyperbolic Grid'
