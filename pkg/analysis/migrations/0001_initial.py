from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=100)),
                ('arguments', models.JSONField(default=dict)),
                ('seed', models.IntegerField()),
                ('rel_tol', models.FloatField()),
                ('max_level', models.PositiveSmallIntegerField()),
                ('row_count', models.PositiveIntegerField(default=0)),
                ('output_sha256', models.CharField(blank=True, max_length=64)),
                ('status', models.CharField(choices=[('succeeded', 'Succeeded'), ('failed', 'Failed')], default='succeeded', max_length=20)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
