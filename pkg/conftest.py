import os

import django


def pytest_configure(config):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'qhgeo_config.settings')
    django.setup()
    from django.test.utils import setup_test_environment
    setup_test_environment()
    from django.db import connections
    config._qhgeo_old_db_names = [
        (connection, connection.creation.create_test_db(verbosity=0, autoclobber=True))
        for connection in connections.all()
    ]


def pytest_unconfigure(config):
    from django.test.utils import teardown_test_environment
    for connection, old_name in getattr(config, '_qhgeo_old_db_names', []):
        connection.creation.destroy_test_db(old_name, verbosity=0)
    teardown_test_environment()
