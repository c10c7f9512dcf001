from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Run',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('subcommand', models.CharField(max_length=20)),
                ('config_text', models.TextField(blank=True)),
                ('manifest', models.TextField()),
                ('manifest_hash', models.CharField(max_length=64)),
                ('summary', models.TextField(default='')),
                ('passed', models.BooleanField(default=None, null=True)),
                ('error', models.TextField(default='')),
                ('date_started', models.DateTimeField(auto_now_add=True)),
                ('date_finished', models.DateTimeField(default=None, null=True)),
            ],
        ),
        migrations.CreateModel(
            name='SeriesRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('index', models.PositiveIntegerField()),
                ('t', models.FloatField()),
                ('energy', models.FloatField()),
                ('tension_l2', models.FloatField()),
                ('lam', models.FloatField(null=True)),
                ('a1', models.FloatField(null=True)),
                ('a2', models.FloatField(null=True)),
                ('ratio_scale', models.FloatField(null=True)),
                ('ratio_energy', models.FloatField(null=True)),
                ('dist_z', models.FloatField(null=True)),
                ('events', models.CharField(blank=True, max_length=200)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='series', to='lab.run')),
            ],
            options={
                'ordering': ['index'],
                'unique_together': {('run', 'index')},
            },
        ),
    ]
